"""Rademacher and Walsh functions in Paley ordering.

Walsh functions are binary-valued (+/-1) piecewise-constant functions on
[0, 1], indexed here by their Paley order n: the function of order n is the
product of the Rademacher square waves R_j picked out by the set bits of n.
Everything in this module is exact -- functions are represented by their
signs on a dyadic grid, switch points are rational, and polynomial moments
are computed in integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "WalshIndex",
    "DyadicFunction",
    "hamming_weight",
    "sequency",
    "rademacher",
    "walsh",
    "switch_points",
    "walsh_transform",
    "inverse_walsh_transform",
    "moment",
    "modulated_moment",
]


def hamming_weight(n: int) -> int:
    """Number of set bits of n (the number of Rademacher factors of W_n)."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    return int(n).bit_count()


def sequency(n: int) -> int:
    """Number of sign changes of the Walsh function of Paley order n.

    Equals the inverse Gray code of n, i.e. the s with gray(s) = n where
    gray(s) = s ^ (s >> 1).  This is also the pulse count of the derived
    decoupling sequence.
    """
    if n < 0:
        raise ValueError("order must be nonnegative")
    s = 0
    g = int(n)
    while g:
        s ^= g
        g >>= 1
    return s


def _set_bits(n: int) -> list[int]:
    """1-indexed positions of the set bits of n, least significant first."""
    return [j + 1 for j in range(int(n).bit_length()) if (n >> j) & 1]


@dataclass(frozen=True)
class WalshIndex:
    """A Paley order together with its derived combinatorial data."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("Paley order must be nonnegative")

    @property
    def bits(self) -> tuple[int, ...]:
        """Binary digits b_1..b_m of n, least significant first."""
        return tuple((self.n >> j) & 1 for j in range(self.m))

    @property
    def m(self) -> int:
        """Bit length of n (0 for n = 0); the minimum grid resolution."""
        return int(self.n).bit_length()

    @property
    def r(self) -> int:
        """Hamming weight: number of Rademacher factors."""
        return hamming_weight(self.n)

    @property
    def s(self) -> int:
        """Sequency: number of sign changes, i.e. pulses."""
        return sequency(self.n)

    @property
    def rademacher_indices(self) -> tuple[int, ...]:
        return tuple(_set_bits(self.n))


def _as_order(n) -> int:
    if isinstance(n, WalshIndex):
        return n.n
    n = int(n)
    if n < 0:
        raise ValueError("Paley order must be nonnegative")
    return n


@dataclass(frozen=True, eq=False)
class DyadicFunction:
    """A +/-1 function on [0, 1) sampled on the dyadic grid of 2^m intervals.

    ``signs[k]`` is the value on [k/2^m, (k+1)/2^m); the function is taken
    right-continuous, so values at switch points never enter any integral.
    """

    m: int
    signs: np.ndarray

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int8)
        if signs.shape != (1 << self.m,):
            raise ValueError("signs must have length 2^m")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signs must be exactly +1 or -1")
        object.__setattr__(self, "signs", signs)

    def refine(self, m: int) -> "DyadicFunction":
        """Resample on a finer grid; values are unchanged."""
        if m < self.m:
            raise ValueError("refinement must not lose resolution")
        return DyadicFunction(m, np.repeat(self.signs, 1 << (m - self.m)))

    def sign_changes(self) -> int:
        return int(np.count_nonzero(self.signs[1:] != self.signs[:-1]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DyadicFunction):
            return NotImplemented
        m = max(self.m, other.m)
        return bool(np.array_equal(self.refine(m).signs, other.refine(m).signs))


def rademacher(j: int, m: int) -> DyadicFunction:
    """Square wave sgn[sin(2^j pi x)] on 2^m dyadic intervals.

    R_0 is identically +1.  The grid must resolve the switchings, so m >= j
    (and m >= 1 so the result is a valid dyadic function).
    """
    if j < 0:
        raise ValueError("Rademacher index must be nonnegative")
    if m < max(j, 1):
        raise ValueError(f"resolution m={m} cannot resolve R_{j}")
    k = np.arange(1 << m)
    signs = 1 - 2 * ((k >> (m - j)) & 1) if j > 0 else np.ones(1 << m, dtype=np.int8)
    return DyadicFunction(m, signs)


def walsh(n, m: int | None = None) -> DyadicFunction:
    """Walsh function of Paley order n on 2^m dyadic intervals.

    The value on interval k is the product over the set bits j of n of the
    Rademacher sign R_j there; W_0 (empty product) is identically +1.
    """
    n = _as_order(n)
    min_m = int(n).bit_length()
    if m is None:
        m = max(min_m, 1)
    if m < min_m:
        raise ValueError(f"resolution m={m} too small for order n={n}")
    k = np.arange(1 << m)
    parity = np.zeros(1 << m, dtype=np.int64)
    for j in _set_bits(n):
        parity ^= (k >> (m - j)) & 1
    return DyadicFunction(m, 1 - 2 * parity)


def switch_points(n) -> list[Fraction]:
    """Exact dyadic locations in (0, 1) where W_n changes sign.

    The list is sorted and has length sequency(n).
    """
    n = _as_order(n)
    if n == 0:
        return []
    f = walsh(n)
    signs = f.signs
    ks = np.nonzero(signs[1:] != signs[:-1])[0] + 1
    return [Fraction(int(k), 1 << f.m) for k in ks]


def _bit_reverse(i: int, m: int) -> int:
    out = 0
    for _ in range(m):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def _sylvester_transform(values: np.ndarray) -> np.ndarray:
    """Unnormalized fast transform with kernel (-1)^popcount(i & k)."""
    v = np.array(values, dtype=np.float64)
    size = v.size
    h = 1
    while h < size:
        v = v.reshape(-1, 2, h)
        top = v[:, 0, :] + v[:, 1, :]
        bot = v[:, 0, :] - v[:, 1, :]
        v = np.stack((top, bot), axis=1).reshape(size)
        h *= 2
    return v

# On the 2^m grid the Paley-ordered Walsh matrix is the Sylvester-Hadamard
# matrix with row index bit-reversed: W_n(k) = (-1)^popcount(rev(n) & k).


def _bit_reversal_permutation(m: int) -> np.ndarray:
    return np.array([_bit_reverse(i, m) for i in range(1 << m)])


def walsh_transform(samples) -> np.ndarray:
    """Paley-ordered analysis coefficients a_n = 2^-m sum_k f_k W_n(k)."""
    f = np.asarray(samples, dtype=np.float64)
    size = f.size
    if size == 0 or size & (size - 1):
        raise ValueError("sample count must be a power of two")
    m = size.bit_length() - 1
    h = _sylvester_transform(f) / size
    return h[_bit_reversal_permutation(m)]


def inverse_walsh_transform(coeffs) -> np.ndarray:
    """Synthesis f_k = sum_n a_n W_n(k); exact inverse of walsh_transform."""
    a = np.asarray(coeffs, dtype=np.float64)
    size = a.size
    if size == 0 or size & (size - 1):
        raise ValueError("coefficient count must be a power of two")
    m = size.bit_length() - 1
    return _sylvester_transform(a[_bit_reversal_permutation(m)])


def moment(n, k: int) -> Fraction:
    """Exact value of the integral of W_n(x) x^k over [0, 1].

    Integrates x^k piecewise over the dyadic intervals in integer
    arithmetic, so the result is an exact rational.  It is identically zero
    whenever k <= hamming_weight(n) - 1.
    """
    n = _as_order(n)
    if n < 1:
        raise ValueError("moment is defined for orders n >= 1")
    if k < 0:
        raise ValueError("polynomial degree must be nonnegative")
    f = walsh(n)
    num = 0
    for i, s in enumerate(f.signs):
        num += int(s) * ((i + 1) ** (k + 1) - i ** (k + 1))
    return Fraction(num, (k + 1) << (f.m * (k + 1)))


def _poly_exp_antiderivative(k: int, c: float, x: float) -> complex:
    """Closed-form antiderivative of x^k e^(i c x), evaluated at x."""
    ic = 1j * c
    total = 0.0 + 0.0j
    coeff = 1.0
    for j in range(k + 1):
        total += (-1) ** j * coeff * x ** (k - j) / ic ** (j + 1)
        coeff *= k - j
    return np.exp(ic * x) * total


def modulated_moment(r: int, k: int) -> complex:
    """Integral of W_(2^r - 1)(x) e^(i 2^(r+1) pi x) x^k over [0, 1].

    Uses exact closed-form antiderivatives on each dyadic piece.  For
    k <= r the value vanishes (checked to ~1e-15 in floating point).
    """
    if r < 1:
        raise ValueError("need at least one Rademacher factor (r >= 1)")
    if k < 0:
        raise ValueError("polynomial degree must be nonnegative")
    n = (1 << r) - 1
    f = walsh(n)
    c = 2.0 ** (r + 1) * math.pi
    total = 0.0 + 0.0j
    size = 1 << f.m
    for i, s in enumerate(f.signs):
        lo = i / size
        hi = (i + 1) / size
        total += int(s) * (
            _poly_exp_antiderivative(k, c, hi) - _poly_exp_antiderivative(k, c, lo)
        )
    return complex(total)
