"""Filtering of detuning errors in a phase-modulated entangling gate.

A driven gate that closes a loop in phase space at detuning delta acquires
a residual displacement when the detuning carries an error Delta.  Flipping
the drive phase at the switch times of a Walsh sequence turns that residual
into exactly the sequence's filter function evaluated at the shifted
frequency (delta + Delta) tau; placing delta on the filter's translational
period creates a notch whose depth grows with the number of Rademacher
factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filters import filter_function, wdd_filter_log
from .sequences import PulsePattern

__all__ = [
    "GateErrorConfig",
    "displacement",
    "expected_displacement_sq",
    "notch_order",
]


@dataclass(frozen=True)
class GateErrorConfig:
    """Nominal drive parameters and the detuning-error distribution width."""

    delta: float
    omega: float
    sigma_delta: float
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("gate duration must be positive")
        if self.sigma_delta < 0:
            raise ValueError("detuning spread must be nonnegative")


def displacement(pattern: PulsePattern, delta: float, delta_err: float,
                 omega: float, tau: float | None = None) -> complex:
    """Residual phase-space displacement after the phase-flipped gate.

    (omega/2) * sum over segments of (-1)^j * integral of
    e^(-i (delta + delta_err) s) ds, by closed-form antiderivatives.  The
    exactly-resonant case delta + delta_err = 0 uses the linear limit.
    """
    if tau is None:
        tau = pattern.tau
    w = delta + delta_err
    bounds = np.asarray(pattern.boundaries) * tau
    signs = pattern.segment_signs()
    if w == 0.0:
        return complex((omega / 2.0) * np.sum(signs * np.diff(bounds)))
    phases = np.exp(-1j * w * bounds)
    total = np.sum(signs * (phases[:-1] - phases[1:]))
    return complex((omega / 2.0) * (-1j / w) * total)


_HERMITE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _hermgauss(nodes: int):
    if nodes not in _HERMITE_CACHE:
        _HERMITE_CACHE[nodes] = np.polynomial.hermite.hermgauss(nodes)
    return _HERMITE_CACHE[nodes]


def expected_displacement_sq(pattern: PulsePattern, cfg: GateErrorConfig,
                             nodes: int = 64) -> float:
    """Mean squared displacement over a Gaussian detuning-error ensemble.

    Gauss-Hermite quadrature of
    (omega^2/4) * F((delta + Delta) tau) / (delta + Delta)^2 against the
    normal density of Delta.  Refuses when the spread is so large that the
    quadrature nodes cross zero frequency.
    """
    x, w = _hermgauss(nodes)
    if cfg.sigma_delta > 0:
        reach = math.sqrt(2.0) * cfg.sigma_delta * float(np.max(np.abs(x)))
        if cfg.delta - reach <= 0.0:
            raise ValueError(
                "sigma_delta too large relative to delta: the error ensemble "
                "crosses zero frequency")
        shifts = cfg.delta + math.sqrt(2.0) * cfg.sigma_delta * x
        weights = w / math.sqrt(math.pi)
    else:
        shifts = np.array([cfg.delta])
        weights = np.array([1.0])
    vals = filter_function(pattern, shifts * cfg.tau) / shifts**2
    return float((cfg.omega**2 / 4.0) * np.sum(weights * vals))


def notch_order(r: int, sweep=None, points: int = 20) -> float:
    """Fitted rolloff of |y~|^2 against the detuning offset at the notch.

    For the sequence of order 2^r - 1 with the nominal detuning on the
    filter's translational period (delta * tau = 2^(r+1) pi), the log-log
    slope of the squared propagator transform against Delta * tau must be
    2 (r + 1).  The sweep must stay well inside the notch.
    """
    if r < 1:
        raise ValueError("need at least one Rademacher factor (r >= 1)")
    if sweep is None:
        sweep = np.geomspace(1e-4, 1e-2, points)
    sweep = np.asarray(sweep, dtype=float)
    if np.any(sweep <= 0) or float(sweep.max()) > math.pi / 4:
        raise ValueError("sweep must stay inside (0, pi/4) around the notch")
    n = (1 << r) - 1
    delta_tau = 2.0 ** (r + 1) * math.pi
    z = delta_tau + sweep
    # |y~(z)|^2 = tau^2 F(z) / z^2; the tau factor shifts the fit only by a
    # constant, so it is dropped.
    log_y_sq = wdd_filter_log(n, z) - 2.0 * np.log(z)
    if not np.all(np.isfinite(log_y_sq)):
        raise ValueError("sweep overlaps a neighboring filter zero")
    return float(np.polyfit(np.log(sweep), log_y_sq, 1)[0])
