"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines, or as a
script (``python tests/test_acceptance.py``) for a plain summary.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from cantormax.analysis import exponent_profile, y_bound
from cantormax.cli import main as cli_main
from cantormax.construction import ahlfors_ratio, build_schedule, sample_realization
from cantormax.experiments.common import ExperimentConfig
from cantormax.experiments.hoeffding import hoeffding_suite
from cantormax.experiments.maximal import sharpness_experiment
from cantormax.experiments.phi import (
    DilationMap,
    adjoint_experiment,
    adjoint_identity_check,
    phi_scaling_experiment,
)
from cantormax.experiments.tails import martingale_check, tail_experiment
from cantormax.geometry import LineParams, line_integral

F = Fraction
RESULTS = {}


def report(number: int, title: str, ok: bool, detail: str, elapsed: float, limit: float):
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    line = f"[{status}] criterion {number:2d}: {title}: {detail} ({elapsed:.2f} s, limit {limit:g} s)"
    print(line)
    RESULTS[number] = line
    assert ok, line
    assert in_time, line


def test_criterion_01_sharp_points():
    t0 = time.perf_counter()
    a = exponent_profile(0.75).p0
    b = exponent_profile(5 / 6).p0
    ok = abs(a - 4 / 3) <= 1e-12 and abs(b - 6 / 5) <= 1e-12
    ok &= abs(a - 1 / 0.75) <= 1e-12 and abs(b - 1 / (5 / 6)) <= 1e-12
    report(1, "exponent sharp points", ok, f"p0(0.75)={a!r}, p0(5/6)={b!r}", time.perf_counter() - t0, 1)


def test_criterion_02_figure_curves():
    t0 = time.perf_counter()
    bad_lower, bad_upper = [], []
    for k in range(101, 200):
        s = k * 0.005
        p = exponent_profile(s)
        if not 1 / s <= p.p0 + 1e-15:
            bad_lower.append(s)
        if s > 2 / 3 and not p.p0 < (2 - s) / s:
            bad_upper.append(s)
    ok = not bad_lower and not bad_upper
    report(2, "exponent curves ordering", ok,
           f"99 grid points, {len(bad_lower)} below 1/s, {len(bad_upper)} not below (2-s)/s",
           time.perf_counter() - t0, 1)


def _engine_case(rng, i):
    s = [F(1, 2), F(3, 5), F(3, 4), F(4, 5)][i % 4]
    n = int(rng.integers(0, 9))
    R = sample_realization(build_schedule(s, n + 2), int(rng.integers(1 << 31)))
    res = n + 8
    x = tuple(F(int(v), 1 << res) - 4 for v in rng.integers(0, (4 << res) + 1, size=2))
    r = tuple(1 + F(int(v), 1 << res) for v in rng.integers(0, (1 << res) + 1, size=2))
    return R, n, LineParams(x, r)


def test_criterion_03_exact_engine():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    exact_fail = 0
    for i in range(500):
        R, n, L = _engine_case(rng, i)
        kind = ("lambda", "mu", "mu_diff")[i % 3]
        e = line_integral(R, n, L, kind, exact=True).dz
        f = line_integral(R, n, L.as_float(), kind).dz
        # relative error with an absolute floor for exact zeros
        worst = max(worst, abs(f - float(e)) / max(abs(float(e)), 1e-12))
        delta = F(1, 1 << int(rng.integers(1, n + 4)))
        parts = [line_integral(R, n, L, kind, reg, delta, exact=True).dz for reg in ("inside_delta", "outside_delta")]
        if parts[0] + parts[1] != e:
            exact_fail += 1
        y0 = line_integral(R, n, L, "mu", exact=True).dz
        y1 = line_integral(R, n + 1, L, "mu", exact=True).dz
        z = line_integral(R, n, L, "mu_diff", exact=True).dz
        if y1 - y0 != z:
            exact_fail += 1
    ok = worst <= 1e-9 and exact_fail == 0
    report(3, "exact engine soundness", ok,
           f"500 configs, max rel err {worst:.2e}, exact identity failures {exact_fail}",
           time.perf_counter() - t0, 60)


def test_criterion_04_deterministic_bounds():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    y_viol = a_viol = 0
    worst_y = worst_a = 0.0
    for t in range(200):
        s = [F(1, 2), F(3, 5), F(3, 4), F(4, 5)][t % 4]
        R = sample_realization(build_schedule(s, 12), 1000 + t)
        for n in range(13):
            ratio = ahlfors_ratio(R, n)
            worst_a = max(worst_a, ratio)
            a_viol += ratio > 3
        for _ in range(50):
            x = tuple(-4 + rng.integers(0, 4 << 12, size=2) / 4096)
            r = tuple(1 + rng.integers(0, 1 << 12, size=2) / 4096)
            L = LineParams(x, r)
            m = int(rng.integers(0, 13))
            Y = line_integral(R, m, L, "mu").h1
            q = Y / y_bound(m, 2, float(s))
            worst_y = max(worst_y, q)
            y_viol += q > 1
    ok = y_viol == 0 and a_viol == 0
    report(4, "deterministic bounds", ok,
           f"Y violations {y_viol} (max Y/bound {worst_y:.3f}), Ahlfors violations {a_viol} (max {worst_a:.3f})",
           time.perf_counter() - t0, 120)


def test_criterion_05_martingale():
    t0 = time.perf_counter()
    failed = [k for k in range(9) if not martingale_check(0.75, k, trials=2000, seed=5).verdicts["within_z"]]
    report(5, "martingale conditional mean", not failed,
           f"k=0..8, T=2000, failing k: {failed or 'none'}", time.perf_counter() - t0, 60)


TAIL_CFG = dict(s=0.8, d=2, seed=20240, trials=2000, m=3, n_range=(6, 14), x=(-3, -2.25), r=(2, 1.25))


def test_criterion_06_tail_decay():
    t0 = time.perf_counter()
    rep = tail_experiment(ExperimentConfig(**TAIL_CFG))
    slope = rep.stats["q95_slope"]
    ok = slope is not None and slope <= -0.2
    detail = (
        f"q95 slope {slope} over live levels {rep.stats['fit_levels']} in [6,14] "
        f"(wider window {rep.stats['wide_window_levels']}: {rep.stats['wide_window_q95_slope']:.3f})"
    )
    report(6, "tail decay slope <= -0.2", ok, detail, time.perf_counter() - t0, 600)


def test_criterion_07_phi_adversary():
    t0 = time.perf_counter()
    rep = phi_scaling_experiment(F(3, 5), 2, (6, 12), 50, seed=700, tolerance=0.15)
    slope = rep.stats["slope"]
    ok = slope is not None and abs(slope - (-0.2)) <= 0.15
    report(7, "phi adversary slope -0.2 +- 0.15", ok,
           f"slope {slope:.4f} over live levels {rep.stats['live_levels']}", time.perf_counter() - t0, 600)


def test_criterion_08_duality():
    t0 = time.perf_counter()
    rep = adjoint_experiment(F(3, 4), 6, 100, seed=800, d=2, tolerance=1e-9)
    gap = rep.stats["max_gap"]
    try:
        adjoint_identity_check(None, 0, DilationMap.constant(F(1)), [(F(-1), F(0))], 3)
        odd_rejected = False
    except ValueError:
        odd_rejected = True
    ok = gap <= 1e-9 and odd_rejected
    report(8, "duality identity", ok, f"100 instances, max gap {gap:.2e}, odd d rejected: {odd_rejected}",
           time.perf_counter() - t0, 120)


def test_criterion_09_sharpness():
    t0 = time.perf_counter()
    R = sample_realization(build_schedule(F(3, 4), 14), 900)
    deltas = [F(1, 1 << j) for j in range(4, 11)]
    rep = sharpness_experiment(F(3, 4), 1.2, 1.2, deltas, R, 14)
    slope = rep.stats["slope"]
    ok = abs(slope - (0.75 - 1 / 1.2)) <= 0.03
    report(9, "sharpness slope -0.0833 +- 0.03", ok, f"slope {slope:.4f}", time.perf_counter() - t0, 120)


def test_criterion_10_hoeffding_janson():
    t0 = time.perf_counter()
    rep = hoeffding_suite(count=1000, trials=2000, seed=1000)
    v = rep.stats["violations"]
    report(10, "Hoeffding-Janson soundness", v == 0,
           f"{rep.stats['configs']} configs, violations {v} "
           f"(sup-norm reading of R, diagnostic only: {rep.stats['supnorm_violations']})",
           time.perf_counter() - t0, 120)


def test_criterion_11_reproducibility(tmp_path):
    t0 = time.perf_counter()
    runs = {
        "tails": ["tails", "--s", "0.8", "--m", "3", "--n-range", "6:14", "--trials", "2000",
                  "--x=-3,-2.25", "--r", "2,1.25", "--seed", str(TAIL_CFG["seed"])],
        "phi": ["phi", "--s", "0.6", "--n-range", "6:12", "--realizations", "50", "--seed", "700"],
        "net-sup": ["net-sup", "--s", "0.8", "--n-range", "10:10", "--trials", "20",
                    "--x-spacing", "1/8", "--r-spacing", "1/4"],
    }
    mismatched = []
    for name, args in runs.items():
        outputs = []
        for threads in (1, 4):
            out = tmp_path / f"{name}_{threads}"
            cli_main([*args, "--threads", str(threads), "--out-dir", str(out)])
            outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        if outputs[0] != outputs[1] or not outputs[0]:
            mismatched.append(name)
    report(11, "reproducibility across --threads", not mismatched,
           f"compared {', '.join(runs)}; mismatches: {mismatched or 'none'}", time.perf_counter() - t0, 1200)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
