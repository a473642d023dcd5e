"""Command-line front end.

Commands: ``fit``, ``select-lag``, ``select-rank``, ``stability``,
``simulate`` and ``mc``.  Reports are JSON (``"schema": 1``) and embed the
configuration, the seed and the package version.  Exit codes: 0 success,
2 configuration error, 3 data error, 4 numerical degeneracy.
"""
import argparse
import csv
import json
import sys
import time

import numpy as np

from . import __version__
from .cointegrate import wls_beta_star
from .data import load_panel, write_panel
from .errors import ConfigError, NumericalError, TvVecmError
from .mcharness import (DgpSpec, McConfig, run_lag_table, run_rank_table,
                        run_rmse_coverage, run_size_power, simulate_path)
from .selection import select_lag, select_rank
from .stabtest import (Restriction, bg_lm_test, resolve_threads, stability_test,
                       standardized_residuals)
from .tvestim import cv_bandwidth, fit_paths, pointwise_ci

SCHEMA = 1


# -- argument types -----------------------------------------------------------

def _auto_or_int(text):
    if text == "auto":
        return "auto"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {text!r}")
    return v


def _cv_or_float(text):
    if text == "cv":
        return "cv"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'cv' or a number, got {text!r}")
    return v


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _add_input(sp):
    sp.add_argument("--input", "-i", required=True, help="CSV file with a header row ('-' for stdin)")
    sp.add_argument("--columns", help="comma-separated series to use")
    sp.add_argument("--order", help="comma-separated column order (first r columns are normalised)")


def _add_output(sp):
    sp.add_argument("--report", "-o", help="report JSON path (default stdout)")


def _add_common(sp):
    sp.add_argument("--bandwidth", type=_cv_or_float, default="cv",
                    help="'cv' or a bandwidth in (0, 1]")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=_auto_or_int, default="auto")


def build_parser():
    ap = argparse.ArgumentParser(prog="tvvecm",
                                 description="Time-varying vector error-correction models.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fit", help="full pipeline: lags, rank, paths, beta, diagnostics")
    _add_input(sp)
    _add_output(sp)
    _add_common(sp)
    sp.add_argument("--lags", type=_auto_or_int, default="auto")
    sp.add_argument("--max-lags", type=int, default=4)
    sp.add_argument("--rank", type=_auto_or_int, default="auto")
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--paths", help="paths CSV output")
    sp.add_argument("--stability", choices=["none", "alpha", "alpha-zero", "gamma"],
                    default="none", help="optional constancy / zero test")
    sp.add_argument("--B", type=int, default=1000, help="bootstrap replications")
    sp.add_argument("--test-level", type=float, default=0.05)

    sp = sub.add_parser("select-lag", help="information-criterion lag choice")
    _add_input(sp)
    _add_output(sp)
    _add_common(sp)
    sp.add_argument("--max-lags", type=int, default=4)

    sp = sub.add_parser("select-rank", help="singular-value-ratio rank choice")
    _add_input(sp)
    _add_output(sp)
    _add_common(sp)
    sp.add_argument("--lags", type=int, required=True)

    sp = sub.add_parser("stability", help="bootstrap constancy test")
    _add_input(sp)
    _add_output(sp)
    _add_common(sp)
    sp.add_argument("--lags", type=int, required=True)
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--restriction", choices=["alpha", "alpha-zero", "gamma"], default="alpha")
    sp.add_argument("--B", type=int, default=1000)
    sp.add_argument("--test-level", type=float, default=0.05)

    sp = sub.add_parser("simulate", help="simulate a bivariate design to CSV")
    sp.add_argument("--dgp", choices=["1", "2", "stability"], default="1")
    sp.add_argument("--T", type=int, default=400)
    sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--burn-in", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", default="-", help="CSV path (default stdout)")

    sp = sub.add_parser("mc", help="Monte Carlo tables")
    sp.add_argument("--table", type=int, choices=[1, 2, 3, 4], required=True)
    sp.add_argument("--reps", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--T", type=_int_list, default=None, help="comma-separated sample sizes")
    sp.add_argument("--dgp", default="1,2", help="designs for tables 1-2, e.g. '1,2'")
    sp.add_argument("--bandwidth", default="cv", help="'cv' or a multiplier a (h = a T^-1/5)")
    sp.add_argument("--multipliers", type=_float_list, default=[1.0])
    sp.add_argument("--b-values", type=_float_list, default=[0.0, 1.0, 2.0])
    sp.add_argument("--B", type=int, default=199)
    sp.add_argument("--threads", type=_auto_or_int, default="auto")
    _add_output(sp)
    return ap


# -- helpers ------------------------------------------------------------------

def _clean(obj):
    """Make ``obj`` JSON-safe: arrays to lists, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def _config_echo(args):
    return {k: v for k, v in sorted(vars(args).items())}


def _emit(report, path):
    text = json.dumps(_clean(report), indent=2, allow_nan=False, sort_keys=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _envelope(args, body, started):
    out = {"schema": SCHEMA, "command": args.command}
    out.update(body)
    out["provenance"] = {"seed": getattr(args, "seed", None), "version": __version__,
                         "config": _config_echo(args)}
    out["wall_clock"] = round(time.perf_counter() - started, 3)
    return out


def _panel(args):
    cols = args.columns.split(",") if args.columns else None
    return load_panel(args.input, columns=cols, order=args.order)


def _restriction(kind, d, r, p):
    width = d * r + d * d * (p - 1)
    if kind in ("alpha", "alpha-zero"):
        if r < 1:
            raise ConfigError("testing alpha needs rank >= 1")
        return Restriction.alpha_block(d, r, p, c_mode="fixed" if kind == "alpha-zero" else "estimate")
    if p < 2:
        raise ConfigError("testing Gamma needs at least 2 lags")
    return Restriction.select(range(d * r, width), width)


def _element_names(d, r, p):
    names = []
    for j in range(r):
        names += [(f"alpha_{i + 1}{j + 1}", i, j) for i in range(d)]
    for lag in range(1, p):
        for j in range(d):
            names += [(f"gamma{lag}_{i + 1}{j + 1}", i, d + (lag - 1) * d + j) for i in range(d)]
    return names


def write_paths(path, fit, bands, r):
    """One row per grid point: ``t``, ``tau`` and each element with se and CI bounds."""
    names = _element_names(fit.d, r, fit.p)
    header = ["t", "tau"]
    for nm, _, _ in names:
        header += [nm, f"{nm}_se", f"{nm}_lo", f"{nm}_hi"]
    t_index = np.arange(fit.t0, fit.T + 1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for g in range(fit.grid.shape[0]):
            row = [int(t_index[g]), repr(float(fit.grid[g]))]
            for _, i, j in names:
                row += [repr(float(bands.estimate[g, i, j])), repr(float(bands.se[g, i, j])),
                        repr(float(bands.lower[g, i, j])), repr(float(bands.upper[g, i, j]))]
            w.writerow(row)


def _bandwidth(args, panel, p):
    if args.bandwidth == "cv":
        return cv_bandwidth(panel, p)
    h = float(args.bandwidth)
    if not 0.0 < h <= 1.0:
        raise ConfigError(f"bandwidth must lie in (0, 1], got {h}")
    return h


def _run_stability(fit, panel, kind, r, beta, args):
    R = _restriction(kind, panel.d, r, fit.p)
    rep = stability_test(fit, R, r, beta_hat=beta, B=args.B, seed=args.seed,
                         level=args.test_level, threads=resolve_threads(args.threads))
    out = rep.to_dict()
    out["restriction"] = kind
    return out


# -- commands -----------------------------------------------------------------

def cmd_fit(args):
    panel = _panel(args)
    body = {}
    if args.lags == "auto":
        bw = None if args.bandwidth == "cv" else float(args.bandwidth)
        lag = select_lag(panel, P=args.max_lags, bandwidth=bw)
        p = lag.p_hat
        body["ic_table"] = lag.to_dict()
    else:
        p = args.lags
        if p < 1:
            raise ConfigError("--lags must be at least 1")
    h = _bandwidth(args, panel, p)
    if args.rank == "auto":
        rk = select_rank(panel, p, h)
        r = rk.r_hat
        body["rank_table"] = rk.to_dict()
    else:
        r = args.rank
        if not 0 <= r <= panel.d:
            raise ConfigError(f"--rank must lie in 0..{panel.d}")
    fit = fit_paths(panel, p, h)
    bands = pointwise_ci(fit, args.level)
    body["dims"] = {"T": panel.T, "d": panel.d, "p": p, "r": r}
    body["columns"] = list(panel.columns)
    body["bandwidth"] = h
    beta = None
    if 1 <= r <= panel.d - 1:
        coint = wls_beta_star(panel, fit, r, level=args.level)
        beta = coint.beta
        body["beta_star"] = coint.to_dict()
    else:
        body["beta_star"] = None
    if args.stability != "none":
        body["stability"] = _run_stability(fit, panel, args.stability, r, beta, args)
    body["diagnostics"] = {"breusch_godfrey": bg_lm_test(standardized_residuals(fit))}
    if args.paths:
        write_paths(args.paths, fit, bands, r)
        body["paths_csv"] = args.paths
    return body


def cmd_select_lag(args):
    panel = _panel(args)
    bw = None if args.bandwidth == "cv" else float(args.bandwidth)
    lag = select_lag(panel, P=args.max_lags, bandwidth=bw)
    return {"dims": {"T": panel.T, "d": panel.d}, "ic_table": lag.to_dict()}


def cmd_select_rank(args):
    panel = _panel(args)
    h = _bandwidth(args, panel, args.lags)
    rk = select_rank(panel, args.lags, h)
    return {"dims": {"T": panel.T, "d": panel.d, "p": args.lags}, "bandwidth": h,
            "rank_table": rk.to_dict()}


def cmd_stability(args):
    panel = _panel(args)
    p, r = args.lags, args.rank
    h = _bandwidth(args, panel, p)
    fit = fit_paths(panel, p, h)
    beta = wls_beta_star(panel, fit, r).beta if 1 <= r <= panel.d - 1 else None
    if r >= 1 and beta is None:
        raise ConfigError("stability test needs 0 <= rank <= d - 1")
    return {"dims": {"T": panel.T, "d": panel.d, "p": p, "r": r}, "bandwidth": h,
            "stability": _run_stability(fit, panel, args.restriction, r, beta, args)}


def cmd_simulate(args):
    kind = {"1": "dgp1", "2": "dgp2", "stability": "stability"}[args.dgp]
    panel = simulate_path(DgpSpec(kind, args.T, burn_in=args.burn_in, b=args.b), args.seed)
    write_panel(args.output, panel)
    return None


def cmd_mc(args):
    bw = args.bandwidth if args.bandwidth == "cv" else float(args.bandwidth)
    cfg = McConfig(reps=args.reps, seed=args.seed, bandwidth=bw, B=args.B,
                   workers=resolve_threads(args.threads))
    Ts = tuple(args.T) if args.T else None
    kinds = tuple("dgp" + k.strip() for k in args.dgp.split(",") if k.strip())
    if args.table == 1:
        rep = run_lag_table(cfg, kinds, Ts or (200, 400, 800))
    elif args.table == 2:
        rep = run_rank_table(cfg, kinds, Ts or (200, 400, 800))
    elif args.table == 3:
        rep = run_rmse_coverage(cfg, Ts or (200, 400, 800))
    else:
        if args.bandwidth == "cv":
            cfg = McConfig(reps=args.reps, seed=args.seed, bandwidth=1.0, B=args.B,
                           workers=cfg.workers)
        rep = run_size_power(cfg, tuple(args.b_values), tuple(args.multipliers), Ts or (400,))
    out = rep.to_dict()
    out.pop("wall_clock", None)
    return {"table": args.table, "mc": out}


COMMANDS = {"fit": cmd_fit, "select-lag": cmd_select_lag, "select-rank": cmd_select_rank,
            "stability": cmd_stability, "simulate": cmd_simulate, "mc": cmd_mc}


def _fail(args, exc, code_name, exit_code):
    err = {"schema": SCHEMA, "error": {"code": code_name, "message": str(exc),
                                       "exit_code": exit_code}}
    for attr in ("row", "column"):
        if getattr(exc, attr, None) is not None:
            err["error"][attr] = getattr(exc, attr)
    text = json.dumps(_clean(err), allow_nan=False)
    sys.stderr.write(text + "\n")
    path = getattr(args, "report", None)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return exit_code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        if getattr(args, "threads", "auto") != "auto":
            resolve_threads(args.threads)
        body = COMMANDS[args.command](args)
    except TvVecmError as exc:
        return _fail(args, exc, exc.code, exc.exit_code)
    except np.linalg.LinAlgError as exc:
        return _fail(args, exc, NumericalError.code, NumericalError.exit_code)
    if body is not None:
        _emit(_envelope(args, body, started), args.report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
