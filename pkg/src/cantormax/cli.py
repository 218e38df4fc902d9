"""Command-line front end.

Every subcommand resolves its options as defaults < ``--config`` file <
flags, runs one experiment, and writes a JSON report plus one CSV per table
into ``--out-dir``.  Exit status: 0 when every verdict passed, 2 when one
failed, 1 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis
from .construction import (
    ahlfors_ratio,
    build_schedule,
    lebesgue_support,
    sample_realization,
)
from .dyadic import to_fraction
from .experiments import hoeffding, maximal, phi, salem, tails
from .experiments.common import ExperimentConfig, ExperimentReport, _jsonable
from .geometry import LineParams, line_integral

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2
FORMATS = ("csv", "json", "svg")
# options that never change results and are left out of the logged config
_UNLOGGED = {"out_dir", "threads", "format", "config", "command"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- value parsers --------------------------------------------------------


def _number(text: str):
    """Decimal or ``p/q`` text as an exact Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _tuple(text: str):
    return tuple(_number(v) for v in text.split(","))


def _int_range(text: str):
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _grid(text: str):
    try:
        start, stop, step = (Fraction(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0:
        raise argparse.ArgumentTypeError("grid step must be positive")
    return start, stop, step


def _bool(text: str):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _formats(text: str):
    out = tuple(v.strip() for v in text.split(",") if v.strip())
    for v in out:
        if v not in FORMATS:
            raise argparse.ArgumentTypeError(f"unknown format {v!r}; choose from {', '.join(FORMATS)}")
    return out


# --- option registry ------------------------------------------------------


class _Command:
    def __init__(self, sub, name: str, help: str, common):
        self.parser = sub.add_parser(name, help=help, parents=[common])
        self.defaults: dict = {}
        self.types: dict = {}
        self.flags: dict = {}

    def opt(self, flag: str, type, default, help: str = ""):
        dest = flag.lstrip("-").replace("-", "_")
        self.parser.add_argument(flag, dest=dest, type=type, default=argparse.SUPPRESS, help=help)
        self.defaults[dest] = default
        self.types[dest] = type
        self.flags[dest] = flag


def _common_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="base seed (default: $CML_SEED or 0)")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")
    g.add_argument("--exact", action="store_true", default=argparse.SUPPRESS, help="rational arithmetic where supported")
    g.add_argument("--out-dir", dest="out_dir", default=argparse.SUPPRESS, help="output directory")
    g.add_argument("--format", type=_formats, default=argparse.SUPPRESS, help="comma list of csv,json,svg")
    g.add_argument("--config", default=argparse.SUPPRESS, help="key=value file")
    return common


GLOBAL_TYPES = {"seed": int, "threads": int, "exact": _bool, "out_dir": str, "format": _formats}
GLOBAL_FLAGS = {k: "--" + k.replace("_", "-") for k in GLOBAL_TYPES}


def build_parser():
    parser = _Parser(prog="cantormax", description=__doc__.splitlines()[0])
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    cmds = {}

    def cmd(name, help):
        c = _Command(sub, name, help, common)
        cmds[name] = c
        return c

    c = cmd("exponents", "exponent table and the three exponent curves")
    c.opt("--s-grid", _grid, (Fraction("0.505"), Fraction("0.995"), Fraction("0.005")), "start:stop:step")

    c = cmd("schedule", "greedy branching schedule")
    c.opt("--s", _number, Fraction(3, 4))
    c.opt("--n-max", int, 12)

    c = cmd("simulate", "sample one realization")
    c.opt("--s", _number, Fraction(3, 4))
    c.opt("--n-max", int, 12)

    c = cmd("lines", "line integrals X, Y, Z along one line")
    c.opt("--s", _number, Fraction(1, 2))
    c.opt("--x", _tuple, (Fraction(-4), Fraction(-4)))
    c.opt("--r", _tuple, (Fraction(1), Fraction(1)))
    c.opt("--n-range", _int_range, (0, 4), "lo:hi")

    for name, help in (("tails", "tail statistics at one line"), ("net-sup", "suprema over a dyadic net")):
        c = cmd(name, help)
        c.opt("--s", _number, Fraction(4, 5))
        c.opt("--d", int, 2)
        c.opt("--trials", int, 100)
        c.opt("--m", int, 3)
        c.opt("--n-range", _int_range, (6, 14), "lo:hi")
        c.opt("--theta", float, None)
        c.opt("--xi", float, None)
        c.opt("--x", _tuple, None)
        c.opt("--r", _tuple, None)
        c.opt("--slope-max", float, None)
        c.opt("--x-spacing", _number, Fraction(1, 16))
        c.opt("--r-spacing", _number, Fraction(1, 4))
        c.opt("--max-net-points", int, 20000)

    c = cmd("phi", "adversarial lower bound and random search")
    c.opt("--s", _number, Fraction(3, 5))
    c.opt("--d", int, 2)
    c.opt("--n-range", _int_range, (6, 12), "lo:hi")
    c.opt("--realizations", int, 50)
    c.opt("--budget", int, 0)
    c.opt("--tolerance", float, 0.15)

    c = cmd("maximal", "discretized maximal operator of an indicator")
    c.opt("--s", _number, Fraction(3, 4))
    c.opt("--n", int, 10)
    c.opt("--f", lambda t: tuple(_number(v) for v in t.split(":")), (Fraction(1), Fraction(2)), "lo:hi (dyadic)")
    c.opt("--x-spacing", _number, Fraction(1, 64))
    c.opt("--r-spacing", _number, None)
    c.opt("--p", float, 1.5)
    c.opt("--q", float, 1.5)

    c = cmd("adjoint-check", "duality identity on random (Omega, r)")
    c.opt("--s", _number, Fraction(3, 4))
    c.opt("--d", int, 2)
    c.opt("--k-max", int, 6)
    c.opt("--instances", int, 100)
    c.opt("--tolerance", float, 1e-9)

    c = cmd("sharpness", "growth of the maximal operator on shrinking indicators")
    c.opt("--s", _number, Fraction(3, 4))
    c.opt("--p", float, 1.2)
    c.opt("--q", float, 1.2)
    c.opt("--n", int, 14)
    c.opt("--deltas", _int_range, (4, 10), "j_lo:j_hi for delta = 2^-j")
    c.opt("--x-spacing", _number, Fraction(1, 128))
    c.opt("--tolerance", float, 0.03)

    c = cmd("salem", "Fourier decay scan of nu_n")
    c.opt("--s", _number, Fraction(3, 4))
    c.opt("--n", int, 10)
    c.opt("--xi-max", float, 256.0)
    c.opt("--eps", float, 0.1)

    c = cmd("hoeffding", "Hoeffding-Janson bound on synthetic dependent sums")
    c.opt("--count", int, 1000)
    c.opt("--trials", int, 2000)

    c = cmd("martingale", "conditional-mean check of the level martingale")
    c.opt("--s", _number, Fraction(3, 4))
    c.opt("--k-max", int, 8)
    c.opt("--trials", int, 2000)

    return parser, cmds


# --- config resolution ----------------------------------------------------


def read_config_file(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"--config: line {lineno} is not key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _default_seed() -> int:
    raw = os.environ.get("CML_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CML_SEED is not an integer: {raw!r}") from None


def resolve(cmd: _Command, ns: argparse.Namespace) -> dict:
    given = vars(ns)
    conf = dict(cmd.defaults)
    conf.update(seed=_default_seed(), threads=1, exact=False, out_dir=".", format=("csv", "json"))
    types = dict(GLOBAL_TYPES, **cmd.types)
    flags = dict(GLOBAL_FLAGS, **cmd.flags)
    if "config" in given:
        for key, raw in read_config_file(given["config"]).items():
            if key not in types:
                raise UsageError(f"--config: unknown key {key!r}")
            try:
                conf[key] = types[key](raw)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"{flags[key]}: {exc}") from None
    for key, value in given.items():
        if key not in ("command", "config"):
            conf[key] = value
    conf["_flags"] = flags
    return conf


def _check(conf, key, ok: bool, message: str):
    if not ok:
        raise UsageError(f"{conf['_flags'][key]}: {message}")


# --- output ---------------------------------------------------------------


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def table_csv(rows: list[dict]) -> str:
    buf = io.StringIO(newline="")
    header = list(rows[0].keys()) if rows else []
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(row.get(k)) for k in header])
    return buf.getvalue()


def figure_svg(rows: list[dict], width: int = 640, height: int = 420) -> str:
    """Static SVG of p0(s), 1/s and (2-s)/s on the given rows."""
    pad = 50
    ss = [float(r["s"]) for r in rows]
    series = {
        "p0": [(float(r["s"]), float(r["p0"])) for r in rows],
        "inv_s": [(float(r["s"]), float(r["inv_s"])) for r in rows],
        "lp_p0": [(float(r["s"]), float(r["lp_p0"])) for r in rows if r["lp_p0"] is not None],
    }
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = min(ss), max(ss)
    y0, y1 = min(ys + [1.0]), max(ys)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1

    def px(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def py(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    style = {
        "p0": 'stroke="#000000" stroke-width="2"',
        "inv_s": 'stroke="#555555" stroke-width="1.5" stroke-dasharray="3,3"',
        "lp_p0": 'stroke="#555555" stroke-width="1.5" stroke-dasharray="8,4"',
    }
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="#000000"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="#000000"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" font-size="14" text-anchor="middle">s</text>',
        f'<text x="14" y="{height / 2:.1f}" font-size="14" text-anchor="middle">p</text>',
    ]
    for tick in np.linspace(x0, x1, 5):
        out.append(
            f'<text x="{px(tick):.1f}" y="{height - pad + 16}" font-size="11" '
            f'text-anchor="middle">{tick:.3g}</text>'
        )
    for tick in np.linspace(y0, y1, 5):
        out.append(
            f'<text x="{pad - 6}" y="{py(tick) + 4:.1f}" font-size="11" text-anchor="end">{tick:.3g}</text>'
        )
    for name, pts in series.items():
        if len(pts) < 2:
            continue
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(f'<polyline id="{name}" fill="none" {style[name]} points="{path}"/>')
    labels = (("p0", "p0(s)"), ("inv_s", "1/s"), ("lp_p0", "(2-s)/s"))
    for i, (name, label) in enumerate(labels):
        yy = pad + 16 * i
        out.append(f'<line x1="{width - 170}" y1="{yy}" x2="{width - 140}" y2="{yy}" fill="none" {style[name]}/>')
        out.append(f'<text x="{width - 132}" y="{yy + 4}" font-size="12">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_outputs(rep: ExperimentReport, conf: dict, extra: dict | None = None) -> list[Path]:
    out_dir = Path(conf["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    stem = rep.name
    if "json" in conf["format"]:
        path = out_dir / f"{stem}.json"
        path.write_text(rep.to_json(), encoding="utf-8", newline="\n")
        written.append(path)
    if "csv" in conf["format"]:
        for name, rows in rep.tables.items():
            path = out_dir / f"{stem}_{name}.csv"
            path.write_text(table_csv(rows), encoding="utf-8", newline="")
            written.append(path)
    for fname, text in (extra or {}).items():
        path = out_dir / fname
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)
    return written


def logged_config(conf: dict) -> dict:
    out = {}
    for k, v in conf.items():
        if k in _UNLOGGED or k.startswith("_"):
            continue
        if isinstance(v, Fraction):
            v = float(v) if not conf.get("exact") else v
        elif isinstance(v, tuple):
            v = [float(x) if isinstance(x, Fraction) and not conf.get("exact") else x for x in v]
        out[k] = v
    return _jsonable(out)


# --- subcommands ----------------------------------------------------------


def _s_arg(conf, lo=Fraction(0), hi=Fraction(1)):
    s = conf["s"]
    _check(conf, "s", lo < s < hi, f"s must lie in ({lo}, {hi}), got {s}")
    return s


def run_exponents(conf):
    start, stop, step = conf["s_grid"]
    half = Fraction(1, 2)
    _check(conf, "s_grid", half < start and stop < 1 and start <= stop,
           "grid must lie inside (1/2, 1)")
    exact = conf["exact"]
    rows = []
    k = 0
    while start + k * step <= stop:
        s = start + k * step
        prof = analysis.exponent_profile(s, exact=True)
        conv = (lambda v: v) if exact else (lambda v: None if v is None else float(v))
        rows.append({
            "s": conv(s), "d": prof.d, "theta0": conv(prof.theta0), "xi0": conv(prof.xi0),
            "p0": conv(prof.p0), "inv_s": conv(prof.sharp_lower), "lp_p0": conv(prof.lp_p0),
        })
        k += 1
    rep = ExperimentReport("exponents", logged_config(conf))
    rep.verdicts = {
        "p0_at_least_inv_s": all(r["p0"] >= r["inv_s"] for r in rows),
        "p0_below_comparison": all(r["p0"] < r["lp_p0"] for r in rows if r["lp_p0"] is not None),
    }
    rep.stats = {"rows": len(rows)}
    rep.tables["exponents"] = rows
    extra = {"exponents.svg": figure_svg(rows)} if "svg" in conf["format"] else None
    return rep, extra


def run_schedule(conf):
    s = _s_arg(conf)
    _check(conf, "n_max", conf["n_max"] >= 1, "n_max must be >= 1")
    sch = build_schedule(s, conf["n_max"])
    rows = [{"n": 0, "a": None, "beta": 1}]
    rows += [{"n": n, "a": sch.a_at(n), "beta": sch.beta_at(n)} for n in range(1, sch.n_max + 1)]
    rep = ExperimentReport("schedule", logged_config(conf))
    rep.verdicts = {"window": sch.window_holds()}
    rep.tables["schedule"] = rows
    return rep, None


def run_simulate(conf):
    s = _s_arg(conf)
    _check(conf, "n_max", conf["n_max"] >= 1, "n_max must be >= 1")
    sch = build_schedule(s, conf["n_max"])
    R = sample_realization(sch, conf["seed"])
    exact = conf["exact"]
    rows = []
    for n in range(sch.n_max + 1):
        size = lebesgue_support(R, n)
        rows.append({
            "n": n, "beta": sch.beta_at(n), "cells": len(R.level(n)),
            "support_length": size if exact else float(size),
            "density": R.nu_value(n) if exact else float(R.nu_value(n)),
            "ahlfors_ratio": ahlfors_ratio(R, n),
            "sigma_vanishes": sch.sigma_vanishes(n) if n < sch.n_max else None,
        })
    rep = ExperimentReport("simulate", logged_config(conf))
    rep.stats = {"levels": [[int(v) for v in R.level(n)] for n in range(sch.n_max + 1)]}
    rep.verdicts = {"ahlfors_at_most_3": all(r["ahlfors_ratio"] <= 3 for r in rows),
                    "cell_counts": all(r["cells"] == r["beta"] for r in rows)}
    rep.tables["levels"] = rows
    return rep, None


def run_lines(conf):
    s = _s_arg(conf)
    lo, hi = conf["n_range"]
    _check(conf, "n_range", 0 <= lo <= hi, "need 0 <= lo <= hi")
    try:
        L = LineParams(conf["x"], conf["r"])
    except ValueError as exc:
        raise UsageError(f"--x/--r: {exc}") from None
    exact = conf["exact"]
    if not exact:
        L = L.as_float()
    R = sample_realization(build_schedule(s, hi + 1), conf["seed"])
    rows = []
    for n in range(lo, hi + 1):
        X = line_integral(R, n, L, "lambda", exact=exact)
        Y = line_integral(R, n, L, "mu", exact=exact)
        Z = line_integral(R, n, L, "mu_diff", exact=exact)
        rows.append({"n": n, "X_dz": X.dz, "X": float(X.h1), "Y_dz": Y.dz, "Y": float(Y.h1),
                     "Z_dz": Z.dz, "Z": float(Z.h1)})
    rep = ExperimentReport("lines", logged_config(conf))
    bound_ok = all(r["Y"] <= analysis.y_bound(r["n"], L.d, float(s)) * (1 + 1e-12) for r in rows)
    rep.stats = {"speed": L.speed}
    rep.verdicts = {"y_bound": bound_ok}
    rep.tables["lines"] = rows
    return rep, None


def _experiment_config(conf) -> ExperimentConfig:
    _check(conf, "trials", conf["trials"] >= 1, f"trials must be >= 1, got {conf['trials']}")
    _check(conf, "d", conf["d"] >= 2 and conf["d"] % 2 == 0, "d must be an even integer >= 2")
    _s_arg(conf)
    lo, hi = conf["n_range"]
    _check(conf, "n_range", conf["m"] <= lo <= hi, "need m <= lo <= hi")
    for key in ("x_spacing", "r_spacing"):
        h = conf[key]
        _check(conf, key, h > 0 and h.numerator == 1 and h.denominator & (h.denominator - 1) == 0,
               "spacing must be a power of two")
    x = conf["x"]
    r = conf["r"]
    if (x is None) != (r is None):
        raise UsageError("--x and --r must be given together")
    return ExperimentConfig(
        s=float(conf["s"]), d=conf["d"], seed=conf["seed"], trials=conf["trials"], m=conf["m"],
        n_range=(lo, hi), theta=conf["theta"], xi=conf["xi"],
        x=None if x is None else tuple(x), r=None if r is None else tuple(r),
        x_spacing=float(conf["x_spacing"]), r_spacing=float(conf["r_spacing"]),
        max_net_points=conf["max_net_points"], slope_max=conf["slope_max"], threads=conf["threads"],
    )


def run_tails(conf):
    cfg = _experiment_config(conf)
    try:
        rep = tails.tail_experiment(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep.config = logged_config(conf)
    return rep, None


def run_net_sup(conf):
    cfg = _experiment_config(conf)
    try:
        rep = tails.net_sup_experiment(cfg)
    except ValueError as exc:
        raise UsageError(f"--max-net-points: {exc}") from None
    rep.config = logged_config(conf)
    return rep, None


def run_phi(conf):
    s = _s_arg(conf)
    _check(conf, "d", conf["d"] >= 2 and conf["d"] % 2 == 0, "d must be an even integer >= 2")
    _check(conf, "realizations", conf["realizations"] >= 1, "need at least one realization")
    _check(conf, "budget", conf["budget"] >= 0, "budget must be >= 0")
    lo, hi = conf["n_range"]
    _check(conf, "n_range", 0 <= lo <= hi, "need 0 <= lo <= hi")
    rep = phi.phi_scaling_experiment(s, conf["d"], (lo, hi), conf["realizations"], conf["seed"],
                                     tolerance=conf["tolerance"], budget=conf["budget"],
                                     threads=conf["threads"])
    rep.config = logged_config(conf)
    return rep, None


def run_maximal(conf):
    s = _s_arg(conf)
    n = conf["n"]
    _check(conf, "n", n >= 0, "n must be >= 0")
    lo, hi = conf["f"]
    _check(conf, "f", lo < hi, "need lo < hi")
    level = max(n, max(Fraction(v).denominator.bit_length() - 1 for v in (lo, hi)))
    try:
        f = maximal.indicator(level, lo, hi)
    except ValueError as exc:
        raise UsageError(f"--f: {exc}") from None
    xh = conf["x_spacing"]
    _check(conf, "x_spacing", xh > 0, "spacing must be positive")
    rh = conf["r_spacing"]
    _check(conf, "r_spacing", rh is None or rh > 0, "spacing must be positive")
    R = sample_realization(build_schedule(s, n), conf["seed"])
    sample = maximal.maximal_apply(R, n, f, float(xh), None if rh is None else float(rh))
    ratio = sample.lq_norm(conf["q"]) / maximal.lp_norm(f, conf["p"])
    rep = ExperimentReport("maximal", logged_config(conf))
    rep.stats = {"ratio": ratio, "sup": float(sample.values.max())}
    rep.verdicts = {"bounded_by_mass": bool(sample.values.max() <= 1 + 1e-12)}
    rep.tables["maximal"] = [
        {"x": x, "Mf": v, "best_r": r} for x, v, r in zip(sample.x.tolist(), sample.values.tolist(), sample.best_r.tolist())
    ]
    return rep, None


def run_adjoint(conf):
    s = _s_arg(conf)
    d = conf["d"]
    _check(conf, "d", d >= 2 and d % 2 == 0, f"d must be even (the identity fails for odd d), got {d}")
    _check(conf, "k_max", conf["k_max"] >= 0, "k_max must be >= 0")
    _check(conf, "instances", conf["instances"] >= 1, "need at least one instance")
    rep = phi.adjoint_experiment(s, conf["k_max"], conf["instances"], conf["seed"], d=d,
                                 exact=conf["exact"], tolerance=conf["tolerance"])
    rep.config = logged_config(conf)
    return rep, None


def run_sharpness(conf):
    s = _s_arg(conf)
    j_lo, j_hi = conf["deltas"]
    _check(conf, "deltas", 0 <= j_lo <= j_hi, "need 0 <= j_lo <= j_hi")
    _check(conf, "deltas", j_hi <= conf["n"], f"delta 2^-{j_hi} is below the grid resolution 2^-{conf['n']}")
    R = sample_realization(build_schedule(s, conf["n"]), conf["seed"])
    deltas = [Fraction(1, 1 << j) for j in range(j_lo, j_hi + 1)]
    rep = maximal.sharpness_experiment(s, conf["p"], conf["q"], deltas, R, conf["n"],
                                       x_spacing=float(conf["x_spacing"]), tolerance=conf["tolerance"])
    rep.config = logged_config(conf)
    return rep, None


def run_salem(conf):
    s = _s_arg(conf)
    _check(conf, "xi_max", conf["xi_max"] >= 2, "xi_max must be >= 2")
    _check(conf, "eps", 0 < conf["eps"] < s, f"eps must lie in (0, s)")
    R = sample_realization(build_schedule(s, conf["n"]), conf["seed"])
    stat = salem.salem_scan(R, conf["n"], conf["xi_max"], conf["eps"])
    rep = ExperimentReport("salem", logged_config(conf))
    rep.stats = {"statistic": stat}
    return rep, None


def run_hoeffding(conf):
    _check(conf, "count", conf["count"] >= 1, "count must be >= 1")
    _check(conf, "trials", conf["trials"] >= 1, "trials must be >= 1")
    rep = hoeffding.hoeffding_suite(conf["count"], conf["trials"], conf["seed"])
    rep.config = logged_config(conf)
    return rep, None


def run_martingale(conf):
    s = _s_arg(conf)
    _check(conf, "trials", conf["trials"] >= 2, "trials must be >= 2")
    rows = []
    ok = True
    for k in range(conf["k_max"] + 1):
        sub = tails.martingale_check(s, k, conf["trials"], conf["seed"])
        ok &= sub.passed
        for p, mu, se in zip(sub.stats["points"], sub.stats["means"], sub.stats["standard_errors"]):
            rows.append({"k": k, "point": p, "nu_k": sub.stats["nu_k"], "mean": mu, "standard_error": se})
    rep = ExperimentReport("martingale", logged_config(conf))
    rep.verdicts = {"within_z": ok}
    rep.tables["means"] = rows
    return rep, None


RUNNERS = {
    "exponents": run_exponents,
    "schedule": run_schedule,
    "simulate": run_simulate,
    "lines": run_lines,
    "tails": run_tails,
    "net-sup": run_net_sup,
    "phi": run_phi,
    "maximal": run_maximal,
    "adjoint-check": run_adjoint,
    "sharpness": run_sharpness,
    "salem": run_salem,
    "hoeffding": run_hoeffding,
    "martingale": run_martingale,
}


def main(argv=None) -> int:
    parser, cmds = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required")
        conf = resolve(cmds[ns.command], ns)
        _check(conf, "threads", conf["threads"] >= 1, "threads must be >= 1")
        rep, extra = RUNNERS[ns.command](conf)
    except UsageError as exc:
        print(f"cantormax: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for path in write_outputs(rep, conf, extra):
        print(path)
    for name, ok in rep.verdicts.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
