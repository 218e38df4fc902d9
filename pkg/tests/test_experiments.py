import math
from fractions import Fraction

import numpy as np
import pytest

from cantormax.construction import build_schedule, nu_level, sample_realization
from cantormax.dyadic import StepFunction
from cantormax.experiments.common import ExperimentConfig, fit_slope, run_trials
from cantormax.experiments.hoeffding import hoeffding_suite
from cantormax.experiments.maximal import (
    indicator,
    lp_norm,
    maximal_apply,
    sharpness_experiment,
)
from cantormax.experiments.phi import (
    DilationMap,
    adjoint_identity_check,
    adjoint_profile,
    adversary_dilation,
    direct_integral_mc,
    direct_pair_integral,
    dual_power_integral,
    phi_adversary,
    phi_search,
    phi_value,
    stratum_fubini_report,
    stratum_measure,
)
from cantormax.experiments.salem import salem_scan
from cantormax.experiments.tails import (
    build_net,
    diagonal_scan,
    net_sup_experiment,
    tail_experiment,
)

F = Fraction
LINE = dict(x=(-3, -2.25), r=(2, 1.25))


# --- harness --------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(trials=0)
    with pytest.raises(ValueError):
        ExperimentConfig(x_spacing=0.3)
    with pytest.raises(ValueError):
        ExperimentConfig(n_range=(8, 6))


def test_fit_slope_and_trials():
    fit = fit_slope([1, 2, 3, 4], [3, 5, 7, 9])
    assert fit.slope == pytest.approx(2) and fit.residual == pytest.approx(0, abs=1e-12)
    assert fit_slope([1], [2]) is None
    assert run_trials(lambda t: t * t, 6, threads=3) == [0, 1, 4, 9, 16, 25]


# --- tails ------------------------------------------------------------------


def test_tail_experiment_basic():
    cfg = ExperimentConfig(s=0.8, d=2, seed=1, trials=30, m=3, n_range=(4, 10), **LINE)
    rep = tail_experiment(cfg)
    assert rep.verdicts["cap_respected"]
    assert rep.stats["calibration_level"] == 5
    live = [row for row in rep.tables["per_n"] if not row["sigma_vanishes"]]
    assert [row["n"] for row in live] == [5, 10]


def test_tail_experiment_stratum_mismatch():
    cfg = ExperimentConfig(s=0.8, trials=2, m=5, **LINE)
    with pytest.raises(ValueError, match="stratum"):
        tail_experiment(cfg)


def test_tail_experiment_thread_independent():
    base = dict(s=0.8, d=2, seed=9, trials=12, m=3, n_range=(4, 10), **LINE)
    one = tail_experiment(ExperimentConfig(threads=1, **base)).to_json()
    many = tail_experiment(ExperimentConfig(threads=4, **base)).to_json()
    assert one == many


def test_net_single_point_matches_tail():
    base = dict(s=0.8, d=2, seed=2, trials=20, m=3, n_range=(5, 10), **LINE)
    tail = tail_experiment(ExperimentConfig(**base))
    net = net_sup_experiment(ExperimentConfig(**base))
    tq = {row["n"]: row["X_q95"] for row in tail.tables["per_n"]}
    for row in net.stats["per_n"]:
        assert row["sup_q95"] == pytest.approx(tq[row["n"]], rel=1e-12)


def test_net_monotone_in_subnet():
    base = dict(s=0.8, d=2, seed=4, trials=4, m=3, n_range=(10, 10), max_net_points=50000)
    coarse = net_sup_experiment(ExperimentConfig(x_spacing=2**-2, r_spacing=2**-1, **base))
    fine = net_sup_experiment(ExperimentConfig(x_spacing=2**-3, r_spacing=2**-2, **base))
    assert coarse.stats["net_points"] < fine.stats["net_points"]
    for a, b in zip(coarse.tables["sups"], fine.tables["sups"]):
        assert a["sup"] <= b["sup"] + 1e-15


def test_net_size_guard():
    cfg = ExperimentConfig(x_spacing=2**-8, r_spacing=2**-4, max_net_points=1000)
    with pytest.raises(ValueError, match="net would hold about"):
        build_net(cfg)


def test_diagonal_scan_reports_constant():
    rep = diagonal_scan(0.8, 3, range(3, 8), lines=20, realizations=2)
    assert rep.stats["C_diag"] > 0
    assert len(rep.tables["per_k"]) == 5


# --- phi ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def R06():
    return sample_realization(build_schedule(F(3, 5), 8), 3)


def test_adjoint_identity_exact(R06):
    omega = [(F(-3), F(-2)), (F(-1, 2), F(0))]
    r_fn = DilationMap(1, tuple(1 + F(j % 5, 4) for j in range(8)))
    lhs, rhs, gap = adjoint_identity_check(R06, 2, r_fn, omega, 2, exact=True)
    assert lhs == rhs and gap == 0 and lhs > 0
    lhs_f, rhs_f, gap_f = adjoint_identity_check(R06, 2, r_fn, omega, 2)
    assert lhs_f == pytest.approx(float(lhs), rel=1e-12) and gap_f <= 1e-12


def test_adjoint_identity_edge_cases(R06):
    r_fn = DilationMap.constant(F(1))
    assert adjoint_identity_check(R06, 2, r_fn, [], 2) == (0, 0, 0)
    with pytest.raises(ValueError, match="odd"):
        adjoint_identity_check(R06, 2, r_fn, [(F(-1), F(0))], 3)


def test_full_window_cancellation(R06):
    zs, vals = adjoint_profile(R06, 0, [(F(-4), F(0))], DilationMap.constant(F(1)), exact=True)
    inside = [v for z, v in zip(zs, vals) if -2 <= z <= 1]
    assert inside and all(v == 0 for v in inside)


def test_adjoint_identity_d4_monte_carlo(R06):
    omega = [(F(-2), F(-1))]
    r_fn = DilationMap.constant(F(3, 2))
    lhs = dual_power_integral(R06, 2, omega, r_fn, 4)
    rhs, err = direct_integral_mc(R06, 2, omega, r_fn, 4, samples=3000, seed=1)
    assert abs(lhs - rhs) <= 4 * err


def test_direct_pair_integral_float_exact(R06):
    omega = [(F(-4), F(-3)), (F(-5, 2), F(-2))]
    r_fn = DilationMap(0, (F(1), F(5, 4), F(3, 2), F(2)))
    exact = direct_pair_integral(R06, 5, omega, r_fn, exact=True)
    assert direct_pair_integral(R06, 5, omega, r_fn) == pytest.approx(float(exact), rel=1e-9)


def test_phi_adversary_vanishing_and_modes(R06):
    sch = R06.schedule
    dead = next(n for n in range(1, 7) if sch.sigma_vanishes(n))
    live = next(n for n in range(1, 7) if not sch.sigma_vanishes(n))
    assert phi_adversary(R06, dead, 2) == 0
    assert phi_adversary(R06, live, 2) == pytest.approx(float(phi_adversary(R06, live, 2, exact=True)))
    assert phi_adversary(R06, live, 4) == pytest.approx(float(phi_adversary(R06, live, 4, exact=True)))


def test_phi_adversary_against_grid_oracle(R06):
    """Piecewise-constant approximations of the aiming dilation converge to the closed form."""
    n = 5
    exact = phi_adversary(R06, n, 2)
    omega, r = adversary_dilation(R06, n)
    approx = {}
    for level in (6, 8, 9, 10):
        h = F(1, 1 << level)
        vals = tuple(min(max(r(-4 + (j + F(1, 2)) * h), F(1)), F(2)) for j in range(4 << level))
        approx[level] = phi_value(R06, n, omega, DilationMap(level, vals), 2)
    errors = [abs(approx[k] - exact) for k in (6, 8, 10)]
    assert errors[0] > errors[1] > errors[2]
    # first-order convergence: Richardson extrapolation removes the leading term
    richardson = 2 * approx[10] - approx[9]
    assert abs(richardson - exact) < 2e-3 * exact
    assert -omega[0][0] == F(2 * int(R06.level(n)[0]) + 1, 1 << (n + 1))


def test_phi_search(R06):
    for n in (2, 5):
        adv = phi_adversary(R06, n, 2)
        assert phi_search(R06, n, 2, 1, seed=0) == adv
        assert phi_search(R06, n, 2, 12, seed=0) >= adv
    with pytest.raises(ValueError):
        phi_search(R06, 2, 2, 0, seed=0)


def test_stratum_measure_single_interval():
    for length in (F(1, 2), F(1), F(3)):
        omega = [(F(-4), F(-4) + length)]
        for m in range(1, 7):
            lo, hi = F(4, 1 << m), min(F(8, 1 << m), length)
            expected = 0 if hi <= lo else 2 * ((length - lo) ** 2 - (length - hi) ** 2) / 2
            assert stratum_measure(omega, m) == expected


def test_stratum_fubini_constant():
    rng = np.random.default_rng(0)
    omegas = []
    for _ in range(20):
        cells = np.flatnonzero(rng.random(32) < 0.4)
        omegas.append([(F(-4) + F(int(j), 8), F(-4) + F(int(j) + 1, 8)) for j in cells])
    rep = stratum_fubini_report(omegas, range(1, 9))
    assert 0 < rep.stats["C_fub"] < 16


# --- maximal operator -----------------------------------------------------------


@pytest.fixture(scope="module")
def R075():
    return sample_realization(build_schedule(F(3, 4), 10), 0)


def test_maximal_constant_function(R075):
    f = indicator(0, F(-2), F(2))
    out = maximal_apply(R075, 8, f, x_grid=np.linspace(-3, -2, 9), r_grid=2.0**-4)
    assert np.allclose(out.values, 1.0)


def test_maximal_zero_and_empty(R075):
    out = maximal_apply(R075, 6, StepFunction.zero(3), x_grid=0.25)
    assert np.all(out.values == 0)
    with pytest.raises(ValueError):
        maximal_apply(R075, 6, indicator(2, F(1), F(2)), x_grid=[])
    with pytest.raises(ValueError):
        maximal_apply(R075, 6, indicator(2, F(1), F(2)), x_grid=0)


def _exact_average(R, n, f, x, r):
    """``int |f|(x + r y) nu_n(y) dy`` in rational arithmetic."""
    nu = nu_level(R, n)
    pts = set()
    for k in nu.indices:
        pts.update({F(k, 1 << n), F(k + 1, 1 << n)})
    for k in f.indices:
        for e in (k, k + 1):
            pts.add((F(e, 1 << f.level) - x) / r)
    pts = sorted(pts)
    total = F(0)
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        total += abs(f(x + r * mid)) * nu(mid) * (b - a)
    return total


def test_maximal_inner_integral_exact(R075):
    f = StepFunction(4, {-20: F(2), -19: F(-1), 3: F(1), 20: F(3)})
    for x, r in ((F(-3), F(5, 4)), (F(-1, 2), F(3, 2)), (F(-2), F(2))):
        out = maximal_apply(R075, 7, f, x_grid=[float(x)], r_grid=[float(r)])
        assert out.values[0] == pytest.approx(float(_exact_average(R075, 7, f, x, r)), abs=1e-12)


def test_sharpness_basics(R075):
    rep = sharpness_experiment(0.75, 1.5, 1.5, [F(1, 16), F(1, 32), F(1, 64)], R075, 10, x_spacing=2**-5)
    assert rep.verdicts["witness_lower_bound"]
    for row in rep.tables["per_delta"]:
        assert row["norm_f"] == pytest.approx((4 * row["delta"]) ** (1 / 1.5), rel=1e-12)
    with pytest.raises(ValueError, match="resolution"):
        sharpness_experiment(0.75, 1.2, 1.2, [F(1, 2048)], R075, 10)
    f = indicator(6, F(1), F(5, 4))
    assert lp_norm(f, 2) == pytest.approx(0.5)


# --- salem and hoeffding ------------------------------------------------------


def test_salem_scan(R075):
    a = salem_scan(R075, 8, 100, 0.1)
    b = salem_scan(R075, 8, 100, 0.3)
    assert b < a
    assert salem_scan(R075, 8, 100, 0.1, sign=-1) == pytest.approx(a, rel=1e-12)
    with pytest.raises(ValueError):
        salem_scan(R075, 8, 1.5, 0.1)
    with pytest.raises(ValueError):
        salem_scan(R075, 8, 50, 0.8)


def test_salem_level_zero_bound(R075):
    s, eps = R075.s, 0.2
    stat = salem_scan(R075, 0, 60, eps)
    # pointwise bound |sin(pi xi)/(pi xi)| <= 1/(pi xi), worst at xi = 2
    assert stat <= 2 ** ((s - eps) / 2 - 1)


def test_hoeffding_small_suite():
    rep = hoeffding_suite(count=60, trials=500, seed=3)
    assert rep.stats["violations"] == 0
    assert rep.verdicts["no_violations"]
