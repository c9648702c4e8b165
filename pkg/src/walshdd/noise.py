"""Parametric noise spectra and the coherence attenuation integral.

The attenuation exponent of a pattern under a one-sided noise power
spectrum S(w) is

    chi = (1/pi) * integral over w >= w_ir of S(w) F(w tau) / w^2

with F the filter function.  The normalization is pinned by the white-noise
anchor: free evolution under S = A decays with chi = A * tau.  Spectra that
rise steeply toward w = 0 make the integral infrared-divergent for some
patterns, which is reported as an explicit error; the optional infrared
cutoff w_ir regularizes those cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .filters import filter_function, wdd_filter_log
from .sequences import PulsePattern, wdd_pattern
from .walsh import WalshIndex, _as_order

__all__ = [
    "NoiseSpectrum",
    "CoherenceResult",
    "InfraredDivergenceError",
    "BracketError",
    "psd_eval",
    "attenuation",
    "t2_time",
]

_KINDS = ("white", "power_law_gaussian_cutoff", "one_over_f", "ohmic", "tabulated")


class InfraredDivergenceError(RuntimeError):
    """The coherence integral diverges at omega -> 0 for this combination."""


class BracketError(RuntimeError):
    """A root-bracketing interval does not actually bracket the target."""


@dataclass(frozen=True)
class NoiseSpectrum:
    """One-sided noise power spectral density S(omega), omega in rad/s.

    Kinds:
      white                     A for omega <= omega_c (hard cutoff)
      power_law_gaussian_cutoff A * omega^-p * exp(-(omega/omega_c)^2)
      one_over_f                same shape, p defaulting to 1, cutoff optional
      ohmic                     A * omega * exp(-(omega/omega_c)^2)
      tabulated                 log-log interpolation of a sampled table

    Every kind is zero below the infrared cutoff ``omega_ir``.
    """

    kind: str
    amplitude: float = 0.0
    exponent: float = 0.0
    omega_c: float = math.inf
    omega_ir: float = 0.0
    table_omega: tuple[float, ...] | None = None
    table_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.omega_c <= 0:
            raise ValueError("cutoff must be positive")
        if self.omega_ir < 0:
            raise ValueError("infrared cutoff must be nonnegative")
        if self.kind == "power_law_gaussian_cutoff" and not math.isfinite(self.omega_c):
            raise ValueError("power-law kind needs a finite cutoff")
        if self.kind == "tabulated":
            if not self.table_omega or not self.table_values:
                raise ValueError("tabulated spectrum needs a table")
            w = np.asarray(self.table_omega, dtype=float)
            s = np.asarray(self.table_values, dtype=float)
            if w.shape != s.shape or w.ndim != 1 or w.size < 2:
                raise ValueError("table must give matching 1-D omega and S arrays")
            if w[0] <= 0 or np.any(np.diff(w) <= 0):
                raise ValueError("table frequencies must be positive and increasing")
            if np.any(s <= 0):
                raise ValueError("table values must be positive (zero is implicit outside)")
            object.__setattr__(self, "table_omega", tuple(float(x) for x in w))
            object.__setattr__(self, "table_values", tuple(float(x) for x in s))

    @classmethod
    def white(cls, amplitude: float, omega_c: float = math.inf,
              omega_ir: float = 0.0) -> "NoiseSpectrum":
        return cls("white", amplitude, 0.0, omega_c, omega_ir)

    @classmethod
    def power_law(cls, amplitude: float, exponent: float, omega_c: float,
                  omega_ir: float = 0.0) -> "NoiseSpectrum":
        return cls("power_law_gaussian_cutoff", amplitude, exponent, omega_c, omega_ir)

    @classmethod
    def one_over_f(cls, amplitude: float, exponent: float = 1.0,
                   omega_c: float = math.inf, omega_ir: float = 0.0) -> "NoiseSpectrum":
        return cls("one_over_f", amplitude, exponent, omega_c, omega_ir)

    @classmethod
    def ohmic(cls, amplitude: float, omega_c: float = math.inf,
              omega_ir: float = 0.0) -> "NoiseSpectrum":
        return cls("ohmic", amplitude, 0.0, omega_c, omega_ir)

    @classmethod
    def tabulated(cls, omega, values, omega_ir: float = 0.0) -> "NoiseSpectrum":
        w = tuple(float(x) for x in omega)
        return cls("tabulated", 1.0, 0.0, w[-1], omega_ir, w,
                   tuple(float(x) for x in values))

    def to_record(self) -> dict:
        rec = {
            "kind": self.kind,
            "A": self.amplitude,
            "p": self.exponent,
            "omega_c": None if math.isinf(self.omega_c) else self.omega_c,
            "omega_ir": self.omega_ir,
        }
        if self.kind == "tabulated":
            rec["omega"] = list(self.table_omega)
            rec["S"] = list(self.table_values)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "NoiseSpectrum":
        kind = rec["kind"]
        omega_c = rec.get("omega_c")
        omega_c = math.inf if omega_c is None else float(omega_c)
        omega_ir = float(rec.get("omega_ir", 0.0))
        if kind == "tabulated":
            return cls.tabulated(rec["omega"], rec["S"], omega_ir)
        return cls(kind, float(rec.get("A", 0.0)), float(rec.get("p", 0.0)),
                   omega_c, omega_ir)


def _log_psd(spec: NoiseSpectrum, omega: np.ndarray) -> np.ndarray:
    """log S(omega), with -inf wherever S vanishes."""
    w = np.asarray(omega, dtype=np.float64)
    out = np.full(w.shape, -np.inf)
    live = w >= spec.omega_ir
    if spec.amplitude == 0.0 and spec.kind != "tabulated":
        return out
    with np.errstate(divide="ignore", invalid="ignore"):
        if spec.kind == "white":
            live = live & (w <= spec.omega_c)
            out[live] = math.log(spec.amplitude)
        elif spec.kind in ("power_law_gaussian_cutoff", "one_over_f"):
            lw = np.log(w, where=w > 0, out=np.full(w.shape, -np.inf))
            val = math.log(spec.amplitude) - spec.exponent * lw
            if math.isfinite(spec.omega_c):
                val = val - (w / spec.omega_c) ** 2
            out[live] = np.broadcast_to(val, w.shape)[live]
        elif spec.kind == "ohmic":
            lw = np.log(w, where=w > 0, out=np.full(w.shape, -np.inf))
            val = math.log(spec.amplitude) + lw
            if math.isfinite(spec.omega_c):
                val = val - (w / spec.omega_c) ** 2
            out[live] = np.broadcast_to(val, w.shape)[live]
        else:
            tw = np.log(np.asarray(spec.table_omega))
            ts = np.log(np.asarray(spec.table_values))
            inside = live & (w >= spec.table_omega[0]) & (w <= spec.table_omega[-1])
            out[inside] = np.interp(np.log(w[inside]), tw, ts)
    return out


def psd_eval(spec: NoiseSpectrum, omega):
    """Evaluate S(omega); vectorized, zero below omega_ir and outside support."""
    w = np.asarray(omega, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("frequencies must be nonnegative")
    scalar = w.ndim == 0
    out = np.exp(_log_psd(spec, np.atleast_1d(w)))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class CoherenceResult:
    """Attenuation exponent chi, coherence W = e^-chi, and the error 1 - W."""

    chi: float
    w: float = field(init=False)
    error: float = field(init=False)
    quad_error: float = 0.0

    def __post_init__(self):
        if self.chi < 0:
            raise ValueError("attenuation must be nonnegative")
        object.__setattr__(self, "w", math.exp(-self.chi))
        object.__setattr__(self, "error", -math.expm1(-self.chi))


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def _panels_integrate(f, panels: np.ndarray):
    """Gauss-Legendre 31 per panel with a 15-point error estimate."""
    mid = 0.5 * (panels[:, 0] + panels[:, 1])
    half = 0.5 * (panels[:, 1] - panels[:, 0])
    x15, w15 = _gl(15)
    x31, w31 = _gl(31)
    i15 = (f(mid[:, None] + half[:, None] * x15) @ w15) * half
    i31 = (f(mid[:, None] + half[:, None] * x31) @ w31) * half
    return i31, np.abs(i31 - i15)


def _adaptive_integral(f, lo: float, hi: float, breaks, epsabs: float,
                       epsrel: float, max_rounds: int = 48,
                       max_panels: int = 40_000) -> tuple[float, float]:
    """Globally adaptive panel integration of a vectorized integrand."""
    pts = sorted({lo, hi, *(x for x in breaks if lo < x < hi)})
    edges: list[float] = []
    span = hi - lo
    for a, b in zip(pts[:-1], pts[1:]):
        cells = min(256, max(1, math.ceil((b - a) / math.pi)))
        edges.extend(np.linspace(a, b, cells + 1)[:-1])
    edges.append(hi)
    work = np.column_stack([edges[:-1], edges[1:]])
    done_i = 0.0
    done_e = 0.0
    n_panels = len(work)
    for _ in range(max_rounds):
        vals, errs = _panels_integrate(f, work)
        total = done_i + vals.sum()
        tol = max(epsabs, epsrel * abs(total))
        frac = (work[:, 1] - work[:, 0]) / span
        ok = errs <= tol * frac
        if n_panels >= max_panels:
            ok = np.ones_like(ok)
        done_i += vals[ok].sum()
        done_e += errs[ok].sum()
        bad = work[~ok]
        if len(bad) == 0:
            break
        mids = 0.5 * (bad[:, 0] + bad[:, 1])
        work = np.vstack([
            np.column_stack([bad[:, 0], mids]),
            np.column_stack([mids, bad[:, 1]]),
        ])
        n_panels += len(bad)
    else:
        vals, errs = _panels_integrate(f, work)
        done_i += vals.sum()
        done_e += errs.sum()
    return done_i, done_e


def _resolve_sequence(seq, tau):
    """Return (pattern, log-filter evaluator in z = omega*tau)."""
    if isinstance(seq, PulsePattern):
        if tau is not None and tau != seq.tau:
            raise ValueError("tau disagrees with the pattern's duration")
        def logf(z):
            with np.errstate(divide="ignore"):
                return np.log(filter_function(seq, z))
        return seq, logf
    n = _as_order(seq)
    if tau is None:
        raise ValueError("tau is required when giving a Paley order")
    if n == 0:
        return _resolve_sequence(PulsePattern(tau, ()), None)
    return wdd_pattern(n, tau), (lambda z: wdd_filter_log(n, z))


def _default_omega_max(spec: NoiseSpectrum, pattern: PulsePattern) -> float:
    gaps = np.diff(pattern.boundaries)
    pulse_rate = 2.0 * math.pi / (pattern.tau * float(gaps.min()))
    if math.isfinite(spec.omega_c):
        return 10.0 * max(spec.omega_c, pulse_rate)
    if spec.kind == "tabulated":
        return min(10.0 * pulse_rate, spec.table_omega[-1])
    raise ValueError(
        "spectrum has no finite cutoff; pass omega_max explicitly")


def _check_infrared(log_integrand, spec: NoiseSpectrum, tau: float) -> None:
    if spec.omega_ir > 0:
        return
    probes = np.array([1e-4, 1e-5, 1e-6]) / tau
    vals = log_integrand(probes)
    if not np.all(np.isfinite(vals)):
        return
    slopes = np.diff(vals) / np.diff(np.log(probes))
    slope = slopes.min()
    if slope <= -1.0 + 1e-3:
        raise InfraredDivergenceError(
            f"integrand grows like omega^{slope:.2f} at omega -> 0, so the "
            "coherence integral is infrared-divergent; set omega_ir > 0")


def attenuation(seq, spec: NoiseSpectrum, tau: float | None = None,
                omega_max: float | None = None, epsabs: float = 1e-8,
                epsrel: float = 1e-8) -> CoherenceResult:
    """Coherence attenuation chi of a sequence under a noise spectrum.

    ``seq`` is a Paley order (with ``tau`` giving the duration) or any
    PulsePattern.  Walsh orders are evaluated through the log closed form,
    which keeps the integrand well conditioned arbitrarily close to
    omega = 0; generic patterns use the segment sum.

    Raises InfraredDivergenceError when the integral has no finite value at
    omega_ir = 0, and reports the quadrature error estimate alongside chi.
    """
    pattern, logf = _resolve_sequence(seq, tau)
    tau = pattern.tau

    def log_integrand(omega):
        w = np.asarray(omega, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _log_psd(spec, w) + logf(w * tau) - 2.0 * np.log(w) - math.log(math.pi)
        return out

    def integrand(omega):
        out = log_integrand(omega)
        return np.exp(out, where=np.isfinite(out), out=np.zeros_like(out))

    _check_infrared(log_integrand, spec, tau)
    if omega_max is None:
        omega_max = _default_omega_max(spec, pattern)
    hi = omega_max
    if spec.kind == "white":
        hi = min(hi, spec.omega_c)
    if spec.kind == "tabulated":
        hi = min(hi, spec.table_omega[-1])
    lo = spec.omega_ir
    if hi <= lo:
        return CoherenceResult(0.0, quad_error=0.0)
    wc = spec.omega_c if math.isfinite(spec.omega_c) else hi
    breaks = [x for x in (wc / 4, wc / 2, wc, 2 * wc, 4 * wc)]
    # panel layout works in z = omega * tau, where F oscillates on scale pi
    zint, zerr = _adaptive_integral(
        lambda z: integrand(z / tau), lo * tau, hi * tau,
        [b * tau for b in breaks], epsabs * tau, epsrel)
    chi = max(zint / tau, 0.0)
    return CoherenceResult(chi, quad_error=zerr / tau)


def t2_time(seq, spec: NoiseSpectrum, tau_lo: float, tau_hi: float,
            rtol: float = 1e-6, omega_max: float | None = None,
            epsabs: float = 1e-8, epsrel: float = 1e-8) -> float:
    """Duration at which the attenuation reaches 1 (the 1/e coherence time).

    Bisects on tau inside [tau_lo, tau_hi]; chi must be increasing across
    the bracket.  Raises BracketError when the interval does not bracket
    chi = 1.
    """
    if not 0 < tau_lo < tau_hi:
        raise ValueError("need 0 < tau_lo < tau_hi")

    def chi_at(tau):
        return attenuation(seq, spec, tau=tau, omega_max=omega_max,
                           epsabs=epsabs, epsrel=epsrel).chi

    c_lo = chi_at(tau_lo)
    c_hi = chi_at(tau_hi)
    if not c_lo < 1.0 < c_hi:
        raise BracketError(
            f"chi spans [{c_lo:.3g}, {c_hi:.3g}] on the bracket, which does "
            "not enclose 1; widen [tau_lo, tau_hi]")
    lo, hi = tau_lo, tau_hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if chi_at(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
