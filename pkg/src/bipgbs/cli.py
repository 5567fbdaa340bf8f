"""Command-line front end producing plot-ready CSV/JSON.

Every run is determined by its arguments; rerunning with the same seed gives
identical data rows. With ``--out`` the file is written atomically next to a
``<out>.meta.json`` record holding the arguments, package version and wall
time.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
import time

import numpy as np

from . import __version__
from . import ensemble_mc as em
from . import gbs_encoding as ge
from . import kernels
from . import matrix_core as mc
from . import repetition_reduction as rr
from . import wishart_bounds as wb
from .errors import BipgbsError, InputError, NumericalError

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

COMMANDS = ("click-stats", "z-calib", "i-ratio", "embed-demo", "validate-bounds", "dist-check", "xi-stats")

DEFAULTS = {
    "click-stats": {"m": "16,32,64,128", "mu": "0.1,0.25,0.4,0.5", "trials": 500},
    "z-calib": {"m": "100,200,300,400,500", "alpha": "3,2m^1/8,2m^1/4", "trials": 50},
    "i-ratio": {"m": "10000:100000:20log", "alpha": "3,4"},
    "embed-demo": {"m": "3", "k": "2"},
    "validate-bounds": {"m": "50,100,200", "alpha": "6,8", "trials": 1000},
    "dist-check": {"m": "1,2,3", "k": "4", "trials": 10},
    "xi-stats": {"k": "100", "trials": 100000},
}


# ------------------------------------------------------------------ parsing


def _split(text):
    return [p.strip() for p in str(text).split(",") if p.strip()]


def parse_int_list(text, name):
    out = []
    for part in _split(text):
        rng = re.fullmatch(r"(\d+(?:\.\d*)?(?:e\d+)?):(\d+(?:\.\d*)?(?:e\d+)?):(\d+)(log)?", part)
        try:
            if rng:
                lo, hi, cnt = float(rng.group(1)), float(rng.group(2)), int(rng.group(3))
                pts = np.logspace(math.log10(lo), math.log10(hi), cnt) if rng.group(4) else np.linspace(lo, hi, cnt)
                out.extend(int(round(v)) for v in pts)
            else:
                v = float(part)
                if v != int(v):
                    raise ValueError
                out.append(int(v))
        except (ValueError, OverflowError):
            raise InputError(f"--{name}: cannot parse {part!r} as an integer or lo:hi:count[log] range") from None
    if not out or any(v < 1 for v in out):
        raise InputError(f"--{name}: values must be positive integers")
    return list(dict.fromkeys(out))


def parse_float_list(text, name):
    try:
        vals = [float(p) for p in _split(text)]
    except ValueError:
        raise InputError(f"--{name}: expected comma-separated numbers") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise InputError(f"--{name}: values must be finite numbers")
    return vals


_ALPHA_RE = re.compile(r"(\d*\.?\d*)\*?m\^\(?(\d*\.?\d+)(?:/(\d*\.?\d+))?\)?")


def parse_alpha(text):
    """Alpha entries are numbers or ``<coef>m^<p>[/<q>]`` (e.g. ``2m^1/4``)."""
    out = []
    for part in _split(text):
        mt = _ALPHA_RE.fullmatch(part.replace(" ", ""))
        if mt:
            coef = float(mt.group(1)) if mt.group(1) else 1.0
            exp = float(mt.group(2)) / (float(mt.group(3)) if mt.group(3) else 1.0)
            out.append((part, lambda m, c=coef, e=exp: c * m**e))
            continue
        try:
            v = float(part)
        except ValueError:
            raise InputError(f"--alpha: cannot parse {part!r}") from None
        if not v > 0:
            raise InputError("--alpha: values must be positive")
        out.append((part, lambda m, v=v: v))
    if not out:
        raise InputError("--alpha: empty list")
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="bipgbs", description=__doc__.splitlines()[0])
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--m", help="comma list; ranges as lo:hi:count or lo:hi:countlog")
    p.add_argument("--mu", help="photon densities (click-stats)")
    p.add_argument("--alpha", help="numbers or forms like 2m^1/4")
    p.add_argument("--k", help="collisions (embed-demo, xi-stats) or max pairs (dist-check)")
    p.add_argument("--trials", type=int)
    p.add_argument("--delta", type=float, default=0.1, help="failure probability (validate-bounds)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--threads", type=int, default=1, help="0 = all cores; results do not depend on it")
    return p


def _opt(args, name):
    val = getattr(args, name)
    return DEFAULTS[args.command].get(name) if val is None else val


# --------------------------------------------------------------- formatting


def fmt_number(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return repr(x)
    if x != 0.0 and not 1e-3 <= abs(x) <= 1e6:
        return np.format_float_scientific(x, unique=True, trim="-")
    return np.format_float_positional(x, unique=True, trim="-")


def to_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_number(r[c]) for c in columns])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------- commands


def cmd_click_stats(args):
    ms = parse_int_list(_opt(args, "m"), "m")
    mus = parse_float_list(_opt(args, "mu"), "mu")
    if any(not 0 < mu < 1 for mu in mus):
        raise InputError("--mu: values must lie in (0, 1)")
    rows = []
    for m in ms:
        for mu in mus:
            rep = em.run_click_experiment(m, mu, _opt(args, "trials"), args.seed, args.threads)
            rows.append(rep.row())
    return em.EnsembleReport.CSV_COLUMNS, rows, {}


def cmd_z_calib(args):
    rows = []
    alphas = parse_alpha(_opt(args, "alpha"))
    for m in parse_int_list(_opt(args, "m"), "m"):
        for _, fa in alphas:
            rows.append(wb.z_calibration(m, fa(m), _opt(args, "trials"), args.seed).row())
    return wb.ZCalibration.CSV_COLUMNS, rows, {}


def cmd_i_ratio(args):
    ms = parse_int_list(_opt(args, "m"), "m")
    rows, slopes = [], {}
    for label, fa in parse_alpha(_opt(args, "alpha")):
        pts = [wb.i_ratio_point(m, fa(m)) for m in ms]
        rows.extend({"m": p.m, "alpha": p.alpha, "logI": p.log_i} for p in pts)
        if len(pts) > 1:
            slopes[label] = wb.loglog_slope([p.m for p in pts], [p.log_i for p in pts])
    for label, sl in slopes.items():
        print(f"alpha={label}: log-log slope {sl:.6f}", file=sys.stderr)
    return ("m", "alpha", "logI"), rows, {"loglog_slope": slopes}


def _demo_pattern(c, k):
    s, t = [1] * c, [1] * c
    for j in range(k):
        target = s if j % 2 == 0 else t
        target[(j // 2) % c] += 1
    return s, t


def cmd_embed_demo(args):
    c = parse_int_list(_opt(args, "m"), "m")[0]
    try:
        k = int(_opt(args, "k"))
    except ValueError:
        raise InputError("--k: expected a single non-negative integer") from None
    if k < 0:
        raise InputError("--k: must be non-negative")
    if c > 8 or c + k > mc.PERMANENT_MAX_N:
        raise InputError("embed-demo limited to c <= 8 and c + k <= 30")
    gen = mc.RngStream(args.seed).generator()
    a = mc.sample_gaussian_matrix(c, c, 0.0, 1.0, gen)
    s, t = _demo_pattern(c, k)
    res = rr.recover_permanent(a, s, t, mc.permanent, gen, full_output=True)
    true = mc.permanent(a)
    rec = {
        "c": c, "s": s, "t": t, "k": k, "xi": res.xi,
        "per_a_true": true, "per_a_recovered": complex(res.value),
        "rel_error": abs(res.value - true) / abs(true) if true != 0 else abs(res.value),
        "oracle_calls": res.oracle_calls,
    }
    return None, [rec], {}


def cmd_validate_bounds(args):
    rows = []
    for m in parse_int_list(_opt(args, "m"), "m"):
        for _, fa in parse_alpha(_opt(args, "alpha")):
            rep = em.validate_tail_bounds(m, fa(m), args.delta, _opt(args, "trials"), args.seed, args.threads)
            row = {k: getattr(rep, k) for k in ("m", "alpha", "delta", "trials", "freq_lambda_max",
                                                 "freq_mean_pairs", "freq_pairs", "freq_z")}
            row["holds"] = all(rep.holds().values())
            rows.append(row)
    cols = ("m", "alpha", "delta", "trials", "freq_lambda_max", "freq_mean_pairs", "freq_pairs", "freq_z", "holds")
    return cols, rows, {}


def cmd_dist_check(args):
    n_max = parse_int_list(_opt(args, "k"), "k")[0]
    if n_max > ge.SECTOR_MAX_N:
        raise InputError(f"--k: at most {ge.SECTOR_MAX_N} pairs")
    rows = []
    for m in parse_int_list(_opt(args, "m"), "m"):
        if m > ge.SECTOR_MAX_M:
            raise InputError(f"--m: at most {ge.SECTOR_MAX_M} modes")
        for prog in range(_opt(args, "trials")):
            c = mc.sample_gaussian_matrix(m, m, 0.0, 1.0, mc.RngStream(args.seed, (m << 32) | prog))
            sig = mc.svd(c).sigma[0]
            tm = ge.encode(c * (0.6 / sig))
            dist = ge.pair_number_distribution(tm, n_max)
            for n in range(n_max + 1):
                mass = ge.exact_sector_mass(tm, n)
                rows.append({"m": m, "program": prog, "n": n, "sector_mass": mass,
                             "pair_prob": dist[n], "abs_error": abs(mass - dist[n])})
    return ("m", "program", "n", "sector_mass", "pair_prob", "abs_error"), rows, {}


def cmd_xi_stats(args):
    rows = []
    for k in parse_int_list(_opt(args, "k"), "k"):
        xs = rr.xi_statistics(k, _opt(args, "trials"), mc.RngStream(args.seed, k))
        rows.append({
            "k": k, "trials": xs.trials, "freq_x": xs.freq_x, "freq_xi": xs.freq_xi,
            "mean_log_factor": xs.mean_log_factor, "var_log_factor": xs.var_log_factor,
            "var_log_x_per_k": xs.var_log_x_per_k,
            "theory_mean": -np.euler_gamma / 2.0, "theory_var": math.pi**2 / 24.0,
        })
    cols = ("k", "trials", "freq_x", "freq_xi", "mean_log_factor", "var_log_factor",
            "var_log_x_per_k", "theory_mean", "theory_var")
    return cols, rows, {}


HANDLERS = {
    "click-stats": cmd_click_stats,
    "z-calib": cmd_z_calib,
    "i-ratio": cmd_i_ratio,
    "embed-demo": cmd_embed_demo,
    "validate-bounds": cmd_validate_bounds,
    "dist-check": cmd_dist_check,
    "xi-stats": cmd_xi_stats,
}


def run(args):
    """Execute a parsed configuration; returns the rendered output text and extras."""
    if args.trials is not None and args.trials < 2 and args.command != "dist-check":
        raise InputError("--trials must be at least 2")
    if args.threads < 0:
        raise InputError("--threads must be non-negative")
    cols, rows, extra = HANDLERS[args.command](args)
    fmt = args.format or ("json" if cols is None else "csv")
    if fmt == "csv":
        if cols is None:
            cols = tuple(rows[0].keys())
            rows = [{c: (json.dumps(_jsonable(v)) if isinstance(v, (list, complex, dict)) else v)
                     for c, v in r.items()} for r in rows]
        text = to_csv(cols, rows)
    else:
        payload = rows[0] if cols is None else rows
        text = json.dumps(_jsonable(payload), indent=2) + "\n"
    return text, extra


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    t0 = time.time()
    try:
        text, extra = run(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, BipgbsError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        write_atomic(args.out, text)
        meta = {
            "config": {k: v for k, v in vars(args).items()},
            "version": __version__,
            "wall_time_s": time.time() - t0,
            "kernel_backend": kernels.backend_name(),
        }
        meta.update(_jsonable(extra))
        write_atomic(args.out + ".meta.json", json.dumps(meta, indent=2) + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK
