"""Search for low-attenuation sequences under a clock-rate constraint.

With the minimum switching time fixed at tau / 2^m there are only 2^m Walsh
sequences, against 2^(2^m) arbitrary digital pulse patterns.  This module
ranks the Walsh candidates by their attenuation under a given spectrum and,
for small m, exhaustively checks the full digital space as an oracle.  Both
searches share one precomputed quadrature grid per spectrum, so the oracle
optimum is bounded above by the Walsh optimum by construction.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .noise import NoiseSpectrum, _log_psd
from .walsh import hamming_weight, walsh

__all__ = ["SearchReport", "enumerate_wdd", "best_wdd", "brute_force_digital"]

_GRID_POINTS_PER_PI = 24
_ORACLE_CHUNK = 4096


def enumerate_wdd(m: int, r_min: int = 0) -> list[int]:
    """All Paley orders below 2^m with at least r_min Rademacher factors."""
    if m < 1:
        raise ValueError("resolution exponent must be >= 1")
    if not 0 <= r_min <= m:
        raise ValueError("r_min must lie in [0, m]")
    return [n for n in range(1 << m) if hamming_weight(n) >= r_min]


@dataclass(frozen=True)
class SearchReport:
    """Outcome of a sequence search; oracle fields are None when not run."""

    m: int
    r_min: int
    tau: float
    spectrum: dict
    candidates: int
    best_n: int | None
    best_chi: float | None
    skipped: tuple[int, ...]
    oracle_candidates: int | None = None
    oracle_best_chi: float | None = None
    oracle_ticks: tuple[int, ...] | None = None
    wdd_is_global_opt: bool | None = None
    elapsed_s: float = 0.0

    def to_record(self) -> dict:
        return {
            "m": self.m,
            "r_min": self.r_min,
            "tau": self.tau,
            "spectrum": self.spectrum,
            "candidates": self.candidates,
            "best_n": self.best_n,
            "best_chi": self.best_chi,
            "skipped": list(self.skipped),
            "oracle_candidates": self.oracle_candidates,
            "oracle_best_chi": self.oracle_best_chi,
            "oracle_pattern_ticks": (None if self.oracle_ticks is None
                                     else list(self.oracle_ticks)),
            "wdd_is_global_opt": self.wdd_is_global_opt,
            "elapsed_s": self.elapsed_s,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_record(), **kwargs)


class _GridObjective:
    """Shared fixed-grid attenuation evaluator for one (spectrum, tau, m).

    chi = (tau/pi) * integral of S(z/tau) F(z) / z^2 dz on a composite
    Simpson grid; the weight vector is precomputed once, and each candidate
    costs one phased matrix product.  Identical grids for every candidate
    make cross-candidate comparisons exact.
    """

    def __init__(self, spec: NoiseSpectrum, tau: float, m: int,
                 omega_max: float | None = None):
        self.spec = spec
        self.tau = tau
        self.m = m
        if omega_max is None:
            if math.isfinite(spec.omega_c):
                omega_max = 10.0 * max(spec.omega_c, (1 << m) * 2 * math.pi / tau)
            else:
                omega_max = 10.0 * (1 << m) * 2 * math.pi / tau
        hi = omega_max
        if spec.kind == "white":
            hi = min(hi, spec.omega_c)
        if spec.kind == "tabulated":
            hi = min(hi, spec.table_omega[-1])
        z_lo = spec.omega_ir * tau
        z_hi = hi * tau
        if z_hi <= z_lo:
            raise ValueError("empty integration range")
        n_cells = max(64, int(math.ceil((z_hi - z_lo) / math.pi)))
        n_points = 2 * n_cells * (_GRID_POINTS_PER_PI // 2) + 1
        z = np.linspace(z_lo, z_hi, n_points)
        if z[0] == 0.0:
            z = z[1:]
            n_points -= 1
            if n_points % 2 == 0:
                z = z[1:]
                n_points -= 1
        w = np.ones(n_points)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= (z[1] - z[0]) / 3.0
        log_s = _log_psd(spec, z / tau)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_weight = log_s - 2.0 * np.log(z / tau)
        weight = np.exp(log_weight, where=np.isfinite(log_weight),
                        out=np.zeros_like(log_weight))
        self.z = z
        # chi = (tau/pi) * integral of S(z/tau) F(z) / z^2 dz; ``weight``
        # already carries S * (tau/z)^2
        self.coeffs = w * weight / (math.pi * tau)
        # bin-edge phases for sign-vector candidates on the 2^m grid
        k = np.arange((1 << m) + 1)
        self.edge_phase = np.exp(1j * np.outer(k / (1 << m), z))
        # S(w)/w^2 may diverge at w -> 0; grid objectives are only sound
        # with an infrared cutoff or an integrable weight
        self.ir_sensitive = (spec.omega_ir == 0.0 and
                             spec.kind in ("power_law_gaussian_cutoff", "one_over_f")
                             and spec.exponent >= 1.0)
        if (spec.omega_ir == 0.0 and
                spec.kind in ("power_law_gaussian_cutoff", "one_over_f")
                and spec.exponent >= 3.0):
            raise ValueError(
                "spectrum too steep for a grid objective at omega_ir = 0; "
                "set omega_ir > 0")

    def chi_of_signs(self, signs: np.ndarray) -> np.ndarray:
        """Attenuation of sign-vector candidates (rows of +/-1 per 2^m bins).

        F(z) = |sum_k c_k (e^(i z (k+1)/2^m) - e^(i z k/2^m))|^2, evaluated
        as one matrix product against the precomputed edge phases.
        """
        signs = np.atleast_2d(np.asarray(signs, dtype=np.float64))
        diff = self.edge_phase[1:] - self.edge_phase[:-1]
        amp = signs @ diff
        f = np.abs(amp) ** 2
        return f @ self.coeffs

    def chi_of_order(self, n: int) -> float:
        size = 1 << self.m
        signs = walsh(n, self.m).signs if n else np.ones(size)
        return float(self.chi_of_signs(signs[None, :])[0])

    def diverges(self, signs: np.ndarray) -> np.ndarray:
        """Per-candidate infrared divergence under this spectrum.

        Unbalanced candidates have F ~ z^2, which cancels the 1/w^2 only
        for spectra bounded at zero; against an unregularized power law
        with p >= 1 their attenuation integral has no finite value.
        """
        signs = np.atleast_2d(signs)
        if not self.ir_sensitive:
            return np.zeros(signs.shape[0], dtype=bool)
        unbalanced = signs.sum(axis=1) != 0
        if self.spec.exponent >= 1.0:
            return unbalanced
        return np.zeros(signs.shape[0], dtype=bool)


def best_wdd(m: int, spec: NoiseSpectrum, tau: float, r_min: int = 0,
             omega_max: float | None = None) -> SearchReport:
    """Best Walsh sequence (minimum attenuation) under a clock constraint.

    Evaluates every order in [0, 2^m) with Hamming weight >= r_min on the
    shared quadrature grid; infrared-divergent candidates (free evolution
    under steep spectra) are reported as skipped.  Ties break toward the
    smaller order, so the result is deterministic.
    """
    start = time.perf_counter()
    grid = _GridObjective(spec, tau, m, omega_max)
    orders = enumerate_wdd(m, r_min)
    signs = np.stack([walsh(n, m).signs if n else np.ones(1 << m, dtype=np.int8)
                      for n in orders]).astype(np.float64)
    bad = grid.diverges(signs)
    chis = grid.chi_of_signs(signs)
    chis[bad] = np.inf
    skipped = tuple(n for n, b in zip(orders, bad) if b)
    if np.all(np.isinf(chis)):
        raise ValueError("every candidate diverges under this spectrum")
    best = int(np.argmin(chis))
    return SearchReport(
        m=m, r_min=r_min, tau=tau, spectrum=spec.to_record(),
        candidates=len(orders), best_n=orders[best],
        best_chi=float(chis[best]), skipped=skipped,
        elapsed_s=time.perf_counter() - start)


def brute_force_digital(m: int, spec: NoiseSpectrum, tau: float,
                        omega_max: float | None = None,
                        r_min: int = 0) -> SearchReport:
    """Exhaustive oracle over all 2^(2^m) digital pulse patterns.

    Each candidate toggles a pulse on or off at every tick of the 2^m
    grid (tick 0 flips the initial sign and is filter-neutral).  Returns
    the global optimum, and whether it coincides with a Walsh sequence
    after dropping a leading tick-0 flip.  The Walsh comparison search runs
    on the same grid, so oracle_best_chi <= best_chi holds exactly.
    """
    if m > 4:
        raise ValueError("oracle capped at m <= 4 (65536 candidates)")
    start = time.perf_counter()
    wdd_report = best_wdd(m, spec, tau, r_min=r_min, omega_max=omega_max)
    grid = _GridObjective(spec, tau, m, omega_max)
    size = 1 << m
    total = 1 << size
    best_chi = math.inf
    best_cand = None
    for lo in range(0, total, _ORACLE_CHUNK):
        cands = np.arange(lo, min(lo + _ORACLE_CHUNK, total), dtype=np.uint32)
        bits = (cands[:, None] >> np.arange(size, dtype=np.uint32)) & 1
        signs = 1.0 - 2.0 * (np.cumsum(bits, axis=1) % 2)
        bad = grid.diverges(signs)
        chis = grid.chi_of_signs(signs)
        chis[bad] = np.inf
        k = int(np.argmin(chis))
        if chis[k] < best_chi:
            best_chi = float(chis[k])
            best_cand = int(cands[k])
    if best_cand is None or math.isinf(best_chi):
        raise ValueError("every candidate diverges under this spectrum")
    ticks = tuple(k for k in range(size) if (best_cand >> k) & 1)
    canonical = tuple(t for t in ticks if t != 0)
    wdd_ticksets = set()
    for n in range(size):
        signs = walsh(n, m).signs if n else np.ones(size, dtype=np.int8)
        changes = np.nonzero(signs[1:] != signs[:-1])[0] + 1
        wdd_ticksets.add(tuple(int(t) for t in changes))
    is_wdd = canonical in wdd_ticksets
    return SearchReport(
        m=m, r_min=wdd_report.r_min, tau=tau, spectrum=spec.to_record(),
        candidates=wdd_report.candidates, best_n=wdd_report.best_n,
        best_chi=wdd_report.best_chi, skipped=wdd_report.skipped,
        oracle_candidates=total, oracle_best_chi=best_chi,
        oracle_ticks=ticks, wdd_is_global_opt=is_wdd,
        elapsed_s=time.perf_counter() - start)
