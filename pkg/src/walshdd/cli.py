"""Batch command line for sequence construction, analysis, and search.

Every run writes a one-line config header (a JSON comment) followed by CSV
rows or a JSON body.  Feeding the header back through ``--config``
reproduces the output byte for byte; stochastic subcommands therefore
require an explicit seed.  Exit codes: 0 success, 2 validation error,
3 numerical failure (divergence or a missing bracket).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys

import numpy as np

from .dcg import GateErrorConfig, expected_displacement_sq, notch_order
from .filters import bandwidth, filter_profile, rolloff_exponent, wdd_filter_log
from .gwdd import first_order_residual, gwdd_schedule
from .noise import (BracketError, InfraredDivergenceError, NoiseSpectrum,
                    attenuation, t2_time)
from .search import best_wdd, brute_force_digital
from .sequences import free_evolution, named_index, udd_pattern, wdd_pattern, wdd_record
from .simulate import bath_fidelity, mc_coherence, random_bath
from .walsh import WalshIndex, moment, walsh

__all__ = ["main"]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _parse_grid(spec: str) -> np.ndarray:
    try:
        kind, lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise ValueError(f"bad grid spec {spec!r}; use log:lo:hi:N or lin:lo:hi:N")
    if count < 2:
        raise ValueError("grid needs at least 2 points")
    if kind == "log":
        if lo <= 0:
            raise ValueError("log grid needs lo > 0")
        return np.geomspace(lo, hi, count)
    if kind == "lin":
        return np.linspace(lo, hi, count)
    raise ValueError(f"unknown grid kind {kind!r}")


def _load_spectrum(params) -> NoiseSpectrum:
    return NoiseSpectrum.from_record(params["spectrum"])


def _sequence_from(params, tau: float):
    """Pattern selected by n / udd / free parameters."""
    if params.get("n") is not None:
        return wdd_pattern(params["n"], tau)
    if params.get("udd") is not None:
        return udd_pattern(params["udd"], tau)
    if params.get("free"):
        return free_evolution(tau)
    raise ValueError("select a sequence with --n, --udd, or --free")


def _header(params) -> str:
    return "# " + json.dumps(params, sort_keys=True, separators=(",", ":")) + "\n"


def _json_body(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _run_walsh(params, out):
    f = walsh(params["n"], params["m"])
    idx = WalshIndex(params["n"])
    if params["format"] == "json":
        out.write(_json_body({"n": idx.n, "m": params["m"], "r": idx.r,
                              "s": idx.s, "signs": [int(v) for v in f.signs]}))
    else:
        out.write("k,sign\n")
        for k, v in enumerate(f.signs):
            out.write(f"{k},{int(v):+d}\n")


def _run_moments(params, out):
    rows = []
    for n in range(1, params["n_max"] + 1):
        r = WalshIndex(n).r
        for k in range(r):
            rows.append((n, r, k, moment(n, k)))
    if params["format"] == "json":
        out.write(_json_body([{"n": n, "r": r, "k": k, "moment": str(v)}
                              for n, r, k, v in rows]))
    else:
        out.write("n,r,k,moment\n")
        for n, r, k, v in rows:
            out.write(f"{n},{r},{k},{v}\n")


def _run_seq(params, out):
    tau = params["tau"]
    if params.get("named") is not None:
        n = named_index(params["named"], params["r"]).n
    elif params.get("n") is not None:
        n = params["n"]
    else:
        n = None
    if n is not None:
        rec = wdd_record(n, tau, params.get("m"))
    else:
        pat = udd_pattern(params["udd"], tau)
        rec = {"n": None, "tau": tau, "deltas": list(pat.deltas), "ticks": None,
               "m": None, "r": None, "s": pat.s}
    if params["format"] == "json":
        out.write(_json_body(rec))
    else:
        out.write("j,delta,tick\n")
        ticks = rec["ticks"] or [""] * len(rec["deltas"])
        for j, (d, t) in enumerate(zip(rec["deltas"], ticks), start=1):
            out.write(f"{j},{_fmt(d)},{t}\n")


def _run_filter(params, out):
    grid = _parse_grid(params["grid"])
    if params.get("n") is not None:
        prof = filter_profile(params["n"], grid)
    else:
        prof = filter_profile(_sequence_from(params, 1.0), grid)
    if params["format"] == "json":
        vals = prof.log_values if params["log_values"] else prof.values
        out.write(_json_body({"omega_tau": [float(z) for z in prof.grid],
                              "logF" if params["log_values"] else "F":
                                  [float(v) for v in vals]}))
    else:
        buf = io.StringIO()
        prof.write_csv(buf, log=params["log_values"])
        out.write(buf.getvalue())


def _run_rolloff(params, out):
    seq = params["n"] if params.get("n") is not None \
        else _sequence_from(params, 1.0)
    value = rolloff_exponent(seq, (params["lo"], params["hi"]), params["points"])
    if params["format"] == "json":
        out.write(_json_body({"exponent": value}))
    else:
        out.write("exponent\n")
        out.write(_fmt(value) + "\n")


def _run_bandwidth(params, out):
    seq = params["n"] if params.get("n") is not None \
        else _sequence_from(params, 1.0)
    value = bandwidth(seq, zmax=params.get("zmax"),
                      grid_points=params["grid_points"])
    if params["format"] == "json":
        out.write(_json_body({"bandwidth": value}))
    else:
        out.write("bandwidth\n")
        out.write(_fmt(value) + "\n")


def _run_coherence(params, out):
    spec = _load_spectrum(params)
    taus = _parse_grid(params["tau_grid"]) if params.get("tau_grid") \
        else np.array([params["tau"]])
    rows = []
    for tau in taus:
        res = attenuation(_sequence_from(params, float(tau)), spec,
                          omega_max=params.get("omega_max"))
        rows.append((tau, res.chi, res.w))
    if params["format"] == "json":
        out.write(_json_body([{"tau": float(t), "chi": c, "W": w}
                              for t, c, w in rows]))
    else:
        out.write("tau,chi,W\n")
        for t, c, w in rows:
            out.write(f"{_fmt(t)},{_fmt(c)},{_fmt(w)}\n")


def _run_t2(params, out):
    spec = _load_spectrum(params)
    value = t2_time(params["n"], spec, params["tau_lo"], params["tau_hi"],
                    omega_max=params.get("omega_max"))
    if params["format"] == "json":
        out.write(_json_body({"t2": value}))
    else:
        out.write("t2\n")
        out.write(_fmt(value) + "\n")


def _run_mc(params, out):
    spec = _load_spectrum(params)
    pattern = _sequence_from(params, params["tau"])
    res = mc_coherence(pattern, spec, params["n_traj"], params["seed"],
                       duration_factor=params["duration_factor"],
                       cells=params.get("cells"))
    w_analytic = attenuation(pattern, spec, omega_max=params.get("omega_max")).w
    if params["format"] == "json":
        out.write(_json_body({"tau": params["tau"], "W_mc": res.w,
                              "stderr": res.stderr, "W_analytic": w_analytic}))
    else:
        out.write("tau,W_mc,stderr,W_analytic\n")
        out.write(f"{_fmt(params['tau'])},{_fmt(res.w)},"
                  f"{_fmt(res.stderr)},{_fmt(w_analytic)}\n")


def _run_bath(params, out):
    bath = random_bath(params["d"], params["seed"],
                       params["coupling_norm"], params["bath_norm"])
    taus = _parse_grid(params["tau_grid"])
    res = bath_fidelity(params["n"], bath, taus)
    if params["format"] == "json":
        out.write(_json_body({"tau": [float(t) for t in res.tau_list],
                              "fidelity_loss": [float(x) for x in res.losses],
                              "exponent": res.exponent}))
    else:
        out.write(f"# fitted_exponent={_fmt(res.exponent)}\n")
        out.write("tau,fidelity_loss\n")
        for t, x in zip(res.tau_list, res.losses):
            out.write(f"{_fmt(t)},{_fmt(x)}\n")


def _run_dcg(params, out):
    if params["mode"] == "notch":
        sweep = _parse_grid(params["sweep"])
        exponent = notch_order(params["r"], sweep)
        n = (1 << params["r"]) - 1
        delta_tau = 2.0 ** (params["r"] + 1) * math.pi
        z = delta_tau + sweep
        log_y_sq = wdd_filter_log(n, z) - 2.0 * np.log(z)
        if params["format"] == "json":
            out.write(_json_body({"Delta_tau": [float(x) for x in sweep],
                                  "y_tilde_sq": [float(v) for v in np.exp(log_y_sq)],
                                  "exponent": exponent}))
        else:
            out.write(f"# fitted_exponent={_fmt(exponent)}\n")
            out.write("Delta_tau,y_tilde_sq\n")
            for x, v in zip(sweep, np.exp(log_y_sq)):
                out.write(f"{_fmt(x)},{_fmt(v)}\n")
    else:
        pattern = _sequence_from(params, params["tau"])
        sigmas = _parse_grid(params["sigma_grid"])
        rows = []
        for sig in sigmas:
            cfg = GateErrorConfig(params["delta"], params["omega"], float(sig),
                                  params["tau"])
            rows.append((sig, expected_displacement_sq(pattern, cfg)))
        if params["format"] == "json":
            out.write(_json_body([{"sigma": float(s), "expected_alpha_sq": v}
                                  for s, v in rows]))
        else:
            out.write("sigma,expected_alpha_sq\n")
            for s, v in rows:
                out.write(f"{_fmt(s)},{_fmt(v)}\n")


def _run_gwdd(params, out):
    sched = gwdd_schedule(params["n"], params.get("m"))
    rec = sched.to_record()
    rec["first_order_residual"] = first_order_residual(sched)
    if params["format"] == "json":
        out.write(_json_body(rec))
    else:
        out.write("tick,axis\n")
        for t, a in sched.events:
            out.write(f"{t},{a}\n")


def _run_search(params, out):
    spec = _load_spectrum(params)
    if params["oracle"]:
        report = brute_force_digital(params["m"], spec, params["tau"],
                                     omega_max=params.get("omega_max"),
                                     r_min=params["r_min"])
    else:
        report = best_wdd(params["m"], spec, params["tau"],
                          r_min=params["r_min"],
                          omega_max=params.get("omega_max"))
    rec = report.to_record()
    del rec["elapsed_s"]  # timing would break byte-identical reruns
    out.write(_json_body(rec))


_RUNNERS = {
    "walsh": _run_walsh,
    "moments": _run_moments,
    "seq": _run_seq,
    "filter": _run_filter,
    "rolloff": _run_rolloff,
    "bandwidth": _run_bandwidth,
    "coherence": _run_coherence,
    "t2": _run_t2,
    "mc": _run_mc,
    "bath": _run_bath,
    "dcg": _run_dcg,
    "gwdd": _run_gwdd,
    "search": _run_search,
}


def render(params: dict) -> str:
    """Full output (header plus body) for a resolved parameter set."""
    sub = params.get("subcommand")
    if sub not in _RUNNERS:
        raise ValueError(f"unknown subcommand {sub!r}")
    out = io.StringIO()
    out.write(_header(params))
    _RUNNERS[sub](params, out)
    return out.getvalue()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("WALSHDD_THREADS", "0")),
                   help="worker cap; results never depend on it")


def _add_spectrum(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spectrum", required=True,
                   help="JSON file with {kind, A, p, omega_c, omega_ir}")
    p.add_argument("--omega-max", dest="omega_max", type=float, default=None)


def _add_sequence_choice(p: argparse.ArgumentParser, free: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=int, help="Paley order")
    g.add_argument("--udd", type=int, help="UDD pulse count")
    if free:
        g.add_argument("--free", action="store_true", help="free evolution")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="walshdd",
        description="Walsh dynamical-decoupling toolkit: sequences, filter "
                    "functions, coherence, simulation, and sequence search.")
    ap.add_argument("--config", default=None,
                    help="re-run from an emitted config header (JSON file)")
    sub = ap.add_subparsers(dest="subcommand")

    p = sub.add_parser("walsh", help="signs of a Walsh function")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("moments", help="exact polynomial moments, k < r")
    p.add_argument("--n-max", dest="n_max", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("seq", help="pulse pattern and digital schedule")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--named", choices=("pdd", "cpmg", "cdd"))
    g.add_argument("--udd", type=int)
    p.add_argument("--r", type=int, default=None, help="level for --named")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--m", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("filter", help="filter function on a frequency grid")
    _add_sequence_choice(p)
    p.add_argument("--grid", required=True, help="log:lo:hi:N or lin:lo:hi:N")
    p.add_argument("--log-values", dest="log_values", action="store_true")
    _add_common(p)

    p = sub.add_parser("rolloff", help="low-frequency filter exponent")
    _add_sequence_choice(p)
    p.add_argument("--lo", type=float, default=1e-4)
    p.add_argument("--hi", type=float, default=1e-3)
    p.add_argument("--points", type=int, default=24)
    _add_common(p)

    p = sub.add_parser("bandwidth", help="largest omega*tau with F <= 1 prefix")
    _add_sequence_choice(p)
    p.add_argument("--zmax", type=float, default=None)
    p.add_argument("--grid-points", dest="grid_points", type=int, default=100_000)
    _add_common(p)

    p = sub.add_parser("coherence", help="attenuation chi and W = e^-chi")
    _add_sequence_choice(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--tau", type=float)
    g.add_argument("--tau-grid", dest="tau_grid")
    _add_spectrum(p)
    _add_common(p)

    p = sub.add_parser("t2", help="duration with chi = 1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau-lo", dest="tau_lo", type=float, required=True)
    p.add_argument("--tau-hi", dest="tau_hi", type=float, required=True)
    _add_spectrum(p)
    _add_common(p)

    p = sub.add_parser("mc", help="Monte Carlo coherence vs analytic")
    _add_sequence_choice(p)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n-traj", dest="n_traj", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--duration-factor", dest="duration_factor", type=int, default=32)
    p.add_argument("--cells", type=int, default=None)
    _add_spectrum(p)
    _add_common(p)

    p = sub.add_parser("bath", help="exact quantum-bath fidelity loss sweep")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tau-grid", dest="tau_grid", required=True)
    p.add_argument("--coupling-norm", dest="coupling_norm", type=float, default=1.0)
    p.add_argument("--bath-norm", dest="bath_norm", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("dcg", help="detuned-gate notch and robustness curves")
    p.add_argument("--mode", choices=("notch", "robust"), required=True)
    p.add_argument("--r", type=int, default=None, help="notch: Rademacher count")
    p.add_argument("--sweep", default="log:1e-4:1e-2:20", help="notch: Delta*tau grid")
    p.add_argument("--n", type=int, default=None, help="robust: Paley order")
    p.add_argument("--udd", type=int, default=None)
    p.add_argument("--free", action="store_true")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--sigma-grid", dest="sigma_grid", default=None)
    _add_common(p)

    p = sub.add_parser("gwdd", help="two-axis schedule of a Walsh order")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("search", help="best Walsh sequence, optional oracle")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--r-min", dest="r_min", type=int, default=0)
    p.add_argument("--oracle", action="store_true")
    _add_spectrum(p)
    _add_common(p)

    return ap


def _params_from_args(args: argparse.Namespace) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("config", "out")}
    if "spectrum" in params and isinstance(params["spectrum"], str):
        with open(params["spectrum"]) as fh:
            params["spectrum"] = json.load(fh)
    return params


def _validate_subcommand_params(params: dict) -> None:
    if params["subcommand"] == "seq" and params.get("named") and params.get("r") is None:
        raise ValueError("--named requires --r")
    if params["subcommand"] == "dcg":
        if params["mode"] == "notch" and params.get("r") is None:
            raise ValueError("notch mode requires --r")
        if params["mode"] == "robust":
            for key in ("tau", "delta", "sigma_grid"):
                if params.get(key) is None:
                    raise ValueError(f"robust mode requires --{key.replace('_', '-')}")


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    out_path = getattr(args, "out", None)
    if args.config is not None:
        with open(args.config) as fh:
            params = json.load(fh)
    elif args.subcommand is None:
        ap.print_help(sys.stderr)
        return 2
    else:
        params = _params_from_args(args)
    try:
        _validate_subcommand_params(params)
        text = render(params)
    except (InfraredDivergenceError, BracketError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"invalid run: {exc}", file=sys.stderr)
        return 2
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
