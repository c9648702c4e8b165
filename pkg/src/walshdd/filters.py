"""Noise filter functions of pulse patterns and their Walsh closed form.

The filter function F(w*tau) of a pattern weights the noise spectrum in the
coherence integral.  Two evaluation routes are provided: the generic
modulus-squared sum over pulse segments, valid for any pattern, and the
product of sine/cosine factors special to Walsh sequences.  The product
route has a log form whose low-frequency values stay representable far
below double-precision underflow of the direct product, which is what the
rolloff fits rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sequences import PulsePattern
from .walsh import WalshIndex, _as_order

__all__ = [
    "FilterProfile",
    "propagator_transform",
    "filter_function",
    "wdd_filter",
    "wdd_filter_log",
    "rolloff_exponent",
    "bandwidth",
    "filter_profile",
]

LN4 = math.log(4.0)


def _edge_coefficients(pattern: PulsePattern) -> tuple[np.ndarray, np.ndarray]:
    """Boundaries b_j and coefficients c_j with sum_j c_j e^(i z b_j) the
    alternating segment sum of Eq.-style filter evaluation."""
    s = pattern.s
    b = np.asarray(pattern.boundaries)
    c = np.empty(s + 2)
    c[0] = 1.0
    if s:
        c[1:-1] = 2.0 * (-1.0) ** np.arange(1, s + 1)
    c[-1] = -((-1.0) ** s)
    return b, c


def propagator_transform(pattern: PulsePattern, omega_tau):
    """Fourier transform of the +/-1 sequence propagator.

    Returns tau * integral of y(x) e^(i z x) over [0, 1] at z = omega_tau,
    so that omega^2 |result|^2 equals the filter function.  At z = 0 the
    exact limit (signed sum of segment lengths, times tau) is used.
    """
    z = np.asarray(omega_tau, dtype=np.float64)
    b, c = _edge_coefficients(pattern)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=np.complex128)
    zero = z == 0.0
    if np.any(~zero):
        zz = z[~zero]
        total = np.exp(1j * np.outer(zz, b)) @ c
        out[~zero] = -pattern.tau * total / (1j * zz)
    if np.any(zero):
        lengths = np.diff(b)
        out[zero] = pattern.tau * float(np.sum(pattern.segment_signs() * lengths))
    return out[0] if scalar else out


def filter_function(pattern: PulsePattern, omega_tau):
    """Filter function of an arbitrary pattern via the segment sum.

    F(z) = |sum_j (-1)^j (e^(i d_j z) - e^(i d_(j+1) z))|^2 over the s+1
    segments.  F(0) = 0 for every pattern.  Low frequencies cancel
    catastrophically for high-order sequences; use the Walsh closed form
    there.
    """
    z = np.asarray(omega_tau, dtype=np.float64)
    b, c = _edge_coefficients(pattern)
    total = np.exp(1j * np.multiply.outer(z, b)) @ c
    return np.abs(total) ** 2


def _factor_args(n: int, omega_tau):
    """Per-factor arguments of the Walsh product form.

    The generating polynomial of the propagator signs factorizes over the
    bits of the cell index, giving the bit of weight 2^(j-1) the factor
    argument 2^(m-j-1) * omega_tau_min (set bit -> sine, clear -> cosine).
    """
    idx = WalshIndex(n)
    m = idx.m
    x = np.asarray(omega_tau, dtype=np.float64) / (1 << m)
    sin_args = [x / 2]
    cos_args = []
    for j in range(1, m + 1):
        arg = 2.0 ** (m - j - 1) * x
        (sin_args if (n >> (j - 1)) & 1 else cos_args).append(arg)
    return m, sin_args, cos_args


def wdd_filter(n, omega_tau):
    """Closed-form filter of the Walsh sequence of order n.

    4^(m+1) sin^2(x/2) * prod sin^2(2^(j-2) x) over set bits * prod cos^2
    over clear bits, with x = omega_tau / 2^m.  Exactly periodic in
    omega_tau with period 2^(m+1) pi.
    """
    n = _as_order(n)
    if n < 1:
        raise ValueError("closed form requires order n >= 1")
    m, sin_args, cos_args = _factor_args(n, omega_tau)
    out = 4.0 ** (m + 1) * np.ones_like(np.asarray(omega_tau, dtype=np.float64))
    for a in sin_args:
        out = out * np.sin(a) ** 2
    for a in cos_args:
        out = out * np.cos(a) ** 2
    return out


def wdd_filter_log(n, omega_tau):
    """Natural log of the closed-form Walsh filter, summed factor by factor.

    Stays finite wherever F > 0, however small; exact zeros give -inf.
    """
    n = _as_order(n)
    if n < 1:
        raise ValueError("closed form requires order n >= 1")
    m, sin_args, cos_args = _factor_args(n, omega_tau)
    out = (m + 1) * LN4 * np.ones_like(np.asarray(omega_tau, dtype=np.float64))
    with np.errstate(divide="ignore"):
        for a in sin_args:
            out = out + 2.0 * np.log(np.abs(np.sin(a)))
        for a in cos_args:
            out = out + 2.0 * np.log(np.abs(np.cos(a)))
    return out


def _log_filter_eval(seq):
    """log F evaluator plus a label for error messages."""
    if isinstance(seq, PulsePattern):
        def logf(z):
            with np.errstate(divide="ignore"):
                return np.log(filter_function(seq, z))
        return logf
    n = _as_order(seq)
    return lambda z: wdd_filter_log(n, z)


def rolloff_exponent(seq, window=(1e-4, 1e-3), points: int = 24) -> float:
    """Low-frequency power-law exponent of the filter function.

    Least-squares slope of log F against log omega_tau over log-spaced
    points in the fit window.  For the Walsh sequence of order n the result
    is 2 (r + 1) with r the Hamming weight.  Accepts a Paley order (log
    closed form, reliable at any order) or a PulsePattern (segment sum,
    reliable only for low orders).
    """
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError("fit window must satisfy 0 < lo < hi")
    if points < 20:
        raise ValueError("need at least 20 fit points")
    z = np.geomspace(lo, hi, points)
    y = _log_filter_eval(seq)(z)
    if not np.all(np.isfinite(y)):
        raise ValueError("fit window contains a filter zero; shrink it")
    slope = np.polyfit(np.log(z), y, 1)[0]
    return float(slope)


def _filter_eval(seq):
    if isinstance(seq, PulsePattern):
        return lambda z: filter_function(seq, z)
    n = _as_order(seq)
    return lambda z: wdd_filter(n, z)


def bandwidth(seq, zmax: float | None = None, grid_points: int = 100_000,
              rtol: float = 1e-9) -> float:
    """Largest omega*tau below which F stays <= 1 (a prefix condition).

    A fine scan locates the first upward crossing of F = 1; bisection then
    refines it to relative precision ``rtol``.  Returns ``zmax`` when F
    never exceeds 1 on the scan.
    """
    f = _filter_eval(seq)
    if zmax is None:
        if isinstance(seq, PulsePattern):
            zmax = 2.0 * math.pi * max(4, seq.s + 1)
        else:
            m = max(WalshIndex(_as_order(seq)).m, 1)
            zmax = 2.0 ** (m + 1) * math.pi
    z = np.linspace(0.0, zmax, grid_points)
    above = f(z) > 1.0
    idx = np.argmax(above)
    if not above[idx]:
        return float(zmax)
    a, b = z[idx - 1], z[idx]
    while b - a > rtol * b:
        mid = 0.5 * (a + b)
        if f(mid) > 1.0:
            b = mid
        else:
            a = mid
    return float(a)


@dataclass(frozen=True)
class FilterProfile:
    """Filter function sampled on a frequency grid (omega_tau values)."""

    grid: np.ndarray
    values: np.ndarray
    log_values: np.ndarray

    def write_csv(self, stream, log: bool = False) -> None:
        col = "logF" if log else "F"
        data = self.log_values if log else self.values
        stream.write(f"omega_tau,{col}\n")
        for z, v in zip(self.grid, data):
            stream.write(f"{z:.17g},{v:.17g}\n")


def filter_profile(seq, grid) -> FilterProfile:
    """Sample the filter function (and its log) on a grid of omega_tau."""
    z = np.asarray(grid, dtype=np.float64)
    if isinstance(seq, PulsePattern):
        values = filter_function(seq, z)
        with np.errstate(divide="ignore"):
            log_values = np.log(values)
    else:
        n = _as_order(seq)
        log_values = wdd_filter_log(n, z)
        values = np.exp(log_values)
    return FilterProfile(z, values, log_values)
