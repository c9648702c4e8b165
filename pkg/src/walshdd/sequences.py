"""Pulse patterns and digital schedules for Walsh decoupling sequences.

A pulse pattern is the analog object (normalized pulse locations plus a
duration); a digital schedule is its clocked form, with every pulse on an
integer tick of the 2^m grid.  Walsh-derived patterns digitize losslessly
by construction; arbitrary patterns are rounded with a per-pulse error
report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .walsh import WalshIndex, _as_order, switch_points

__all__ = [
    "PulsePattern",
    "DigitalSchedule",
    "DigitizeResult",
    "wdd_pattern",
    "named_index",
    "udd_pattern",
    "repeat",
    "concatenate",
    "compile_schedule",
    "digitize",
    "free_evolution",
    "wdd_record",
]


@dataclass(frozen=True)
class PulsePattern:
    """Normalized pulse locations in (0, 1) plus the total duration."""

    tau: float
    deltas: tuple[float, ...]

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("duration must be positive")
        deltas = tuple(float(d) for d in self.deltas)
        if any(not 0.0 < d < 1.0 for d in deltas):
            raise ValueError("pulse locations must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("pulse locations must be strictly increasing")
        object.__setattr__(self, "deltas", deltas)

    @property
    def s(self) -> int:
        """Pulse count; s = 0 is free evolution."""
        return len(self.deltas)

    @property
    def boundaries(self) -> tuple[float, ...]:
        """Segment boundaries 0 = d_0 < d_1 < ... < d_(s+1) = 1."""
        return (0.0, *self.deltas, 1.0)

    def segment_signs(self) -> np.ndarray:
        """Propagator sign (-1)^j on each of the s+1 segments."""
        return (-1.0) ** np.arange(self.s + 1)


def free_evolution(tau: float) -> PulsePattern:
    """The trivial pattern with no pulses."""
    return PulsePattern(tau, ())


@dataclass(frozen=True)
class DigitalSchedule:
    """Clocked pulse schedule: integer ticks on a 2^m grid.

    ``rademacher_bits`` lists the square-wave generator indices needed to
    produce the sequence in hardware; it is None for schedules that do not
    come from a single Walsh function.
    """

    m: int
    tau_min: float
    ticks: tuple[int, ...]
    rademacher_bits: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("resolution exponent must be nonnegative")
        ticks = tuple(int(t) for t in self.ticks)
        if any(not 1 <= t <= (1 << self.m) - 1 for t in ticks):
            raise ValueError("ticks must lie in [1, 2^m - 1]")
        if any(b <= a for a, b in zip(ticks, ticks[1:])):
            raise ValueError("ticks must be strictly increasing")
        object.__setattr__(self, "ticks", ticks)

    @property
    def tau(self) -> float:
        return self.tau_min * (1 << self.m)

    def pattern(self) -> PulsePattern:
        return PulsePattern(self.tau, tuple(t / (1 << self.m) for t in self.ticks))


def wdd_pattern(n, tau: float) -> PulsePattern:
    """Pulse pattern of the Walsh decoupling sequence of Paley order n.

    Pulses sit at the switch points of W_n, so the pulse count equals the
    sequency of n; n = 0 is free evolution.
    """
    n = _as_order(n)
    return PulsePattern(tau, tuple(float(p) for p in switch_points(n)))


_TABLE_COUNTS = {
    "pdd": lambda r: (1 << (r + 1)) - 1,
    "cpmg": lambda r: 1 << r,
    "cdd": lambda r: math.ceil(((1 << (r + 1)) - 2) / 3),
}


def named_index(kind: str, r: int) -> WalshIndex:
    """Paley order of a familiar sequence family member.

    PDD (uniformly spaced pulses) is the single square wave n = 2^r; CPMG
    with 2^r pulses is n = 2^(r-1) + 2^r; CDD at concatenation level r is
    n = 2^r - 1.  The returned order's sequency always matches the familiar
    pulse count.
    """
    if r < 1:
        raise ValueError("family level r must be >= 1")
    key = kind.lower()
    if key == "pdd":
        n = 1 << r
    elif key == "cpmg":
        n = (1 << (r - 1)) + (1 << r)
    elif key == "cdd":
        n = (1 << r) - 1
    else:
        raise ValueError(f"unknown sequence family {kind!r}")
    idx = WalshIndex(n)
    assert idx.s == _TABLE_COUNTS[key](r)
    return idx


def udd_pattern(s: int, tau: float) -> PulsePattern:
    """Uhrig pattern with s pulses at sin^2(j pi / (2s + 2)).

    Comparison baseline only; the locations are irrational, so the pattern
    never digitizes exactly.
    """
    if s < 1:
        raise ValueError("UDD needs at least one pulse")
    deltas = tuple(math.sin(j * math.pi / (2 * s + 2)) ** 2 for j in range(1, s + 1))
    return PulsePattern(tau, deltas)


def repeat(n) -> WalshIndex:
    """Order of the sequence whose propagator is two identical halves of W_n."""
    return WalshIndex(2 * _as_order(n))


def concatenate(n) -> WalshIndex:
    """Order of the sequence whose propagator is W_n followed by its negation."""
    return WalshIndex(2 * _as_order(n) + 1)


def compile_schedule(n, m: int, tau: float) -> DigitalSchedule:
    """Exact digital schedule of the Walsh sequence of order n on a 2^m grid.

    All switch points of W_n are integer multiples of 2^-m once m is at
    least the bit length of n, so the compilation is lossless.
    """
    n = _as_order(n)
    if m < int(n).bit_length():
        raise ValueError(f"resolution m={m} too small for order n={n}")
    if m < 1:
        raise ValueError("resolution exponent must be >= 1")
    scale = 1 << m
    ticks = []
    for p in switch_points(n):
        t = p * scale
        assert t.denominator == 1
        ticks.append(int(t))
    bits = WalshIndex(n).rademacher_indices
    return DigitalSchedule(m, tau / scale, tuple(ticks), bits)


@dataclass(frozen=True)
class DigitizeResult:
    """Rounded schedule plus the per-pulse rounding report.

    ``rounding_errors[j]`` is the signed offset (in units of tau_min) of
    input pulse j from the tick it was rounded to.  Pulses that collide on
    one tick cancel pairwise (two pi rotations are the identity); an odd
    pile leaves a single pulse.  Pulses rounding to the sequence boundary
    are dropped and counted.
    """

    schedule: DigitalSchedule
    rounding_errors: tuple[float, ...]
    collided: bool
    boundary_dropped: int


def digitize(pattern: PulsePattern, m: int) -> DigitizeResult:
    """Round a pulse pattern to the nearest ticks of a 2^m grid."""
    if m < 1:
        raise ValueError("resolution exponent must be >= 1")
    scale = 1 << m
    raw = [d * scale for d in pattern.deltas]
    ticks = [round(x) for x in raw]
    errors = tuple(x - t for x, t in zip(raw, ticks))
    boundary = sum(1 for t in ticks if t in (0, scale))
    counts: dict[int, int] = {}
    for t in ticks:
        if t in (0, scale):
            continue
        counts[t] = counts.get(t, 0) + 1
    collided = any(c > 1 for c in counts.values())
    kept = tuple(sorted(t for t, c in counts.items() if c % 2 == 1))
    schedule = DigitalSchedule(m, pattern.tau / scale, kept, None)
    return DigitizeResult(schedule, errors, collided, boundary)


def wdd_record(n, tau: float, m: int | None = None) -> dict:
    """JSON-ready record of a Walsh sequence: {n, tau, deltas, ticks, m, r, s}."""
    idx = WalshIndex(_as_order(n))
    if m is None:
        m = max(idx.m, 1)
    sched = compile_schedule(idx.n, m, tau)
    return {
        "n": idx.n,
        "tau": tau,
        "deltas": [float(p) for p in switch_points(idx.n)],
        "ticks": list(sched.ticks),
        "m": m,
        "r": idx.r,
        "s": idx.s,
    }
