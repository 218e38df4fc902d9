import math
from fractions import Fraction

import numpy as np
import pytest

from cantormax.analysis import y_bound
from cantormax.construction import build_schedule, sample_realization, sigma_level
from cantormax.experiments.tails import sample_line_in_stratum
from cantormax.geometry import (
    LineParams,
    classify_separation,
    continuity_defect,
    diagonal_zset,
    line_integral,
    line_speed,
    step_product_integral,
    z_window,
)

F = Fraction


def line(x, r):
    return LineParams(tuple(F(v) for v in x), tuple(F(v) for v in r))


def test_line_speed():
    assert line_speed(line((-4, -4), (1, 1))) == pytest.approx(math.sqrt(2))
    assert line_speed(line((-4, -4), (2, 2))) == pytest.approx(math.sqrt(2) / 2)
    assert line_speed(line((-4, -4, -4, -4), (1, 2, 2, 2))) == pytest.approx(1.3228756555)


def test_line_params_validation():
    with pytest.raises(ValueError):
        LineParams((-4.5, 0), (1, 1))
    with pytest.raises(ValueError):
        LineParams((-4, 0), (1, 2.5))
    with pytest.raises(ValueError):
        LineParams((-4,), (1,))


def test_classify_separation():
    assert classify_separation((F(-4), F(-7, 2))).m == 4
    assert classify_separation((F(-1), F(-1))).on_diagonal
    assert classify_separation((F(-1), F(-3, 8))).m == 3
    assert classify_separation((-1.0, -0.375)).m == 3
    for x in [(F(-4), F(-3)), (F(-2), F(-1, 16)), (F(-4), F(-4) + F(1, 1024))]:
        st = classify_separation(x)
        assert st.contains_gap(abs(x[0] - x[1]))


def test_z_window():
    assert z_window(line((-4, -4), (1, 1))) == (-3, -2)
    assert z_window(line((-4, F(-7, 2)), (1, 1))) == (F(-5, 2), -2)
    assert z_window(line((-4, 0), (1, 1))) is None


def test_diagonal_zset():
    assert diagonal_zset(line((-4, F(-7, 2)), (1, 1)), F(1, 4)) == []
    assert diagonal_zset(line((-4, -4), (1, 1)), F(1, 1000)) == [(-3, 4)]
    assert diagonal_zset(line((-4, F(-7, 2)), (1, 2)), F(1, 10)) == []
    zs = diagonal_zset(line((-4, -3), (1, 2)), F(1, 4))
    # gap(z) = (z+4) - (z+3)/2 = (z+5)/2, below 1/4 for z in (-5.5, -4.5): empty on [-3, 4]
    assert zs == []
    zs = diagonal_zset(line((-2, -4), (1, 2)), F(1, 2))
    # (z+2) - (z+4)/2 = z/2 ; |z/2| < 1/2  <=>  z in (-1, 1)
    assert zs == [(-1, 1)]
    with pytest.raises(ValueError):
        diagonal_zset(line((-2, -4), (1, 2)), 0)


def test_line_integral_examples(half_realization):
    R = half_realization
    X = line_integral(R, 0, line((-4, -4), (1, 1)), "lambda", exact=True)
    assert X.dz == 1 and X.h1 == pytest.approx(math.sqrt(2))
    X = line_integral(R, 0, line((-4, F(-7, 2)), (1, 1)), "lambda", exact=True)
    assert X.dz == F(-1, 2) and X.h1 == pytest.approx(-math.sqrt(2) / 2)
    Y = line_integral(R, 0, line((-4, -4), (1, 1)), "mu", exact=True)
    assert Y.dz == 1 and Y.h1 == pytest.approx(math.sqrt(2))
    assert Y.h1 <= y_bound(0, 2, 0.5)


def test_restricted_region_needs_delta(half_realization):
    with pytest.raises(ValueError):
        line_integral(half_realization, 0, line((-4, -4), (1, 1)), region="inside_delta")
    with pytest.raises(ValueError):
        line_integral(half_realization, 0, line((-4, -4), (1, 1)), region="inside_delta", delta=0)


def _random_cases(count, seed=0):
    rng = np.random.default_rng(seed)
    for i in range(count):
        s = [F(1, 2), F(3, 5), F(3, 4), F(4, 5)][i % 4]
        n = int(rng.integers(0, 7))
        R = sample_realization(build_schedule(s, n + 2), int(rng.integers(1 << 30)))
        res = n + 8
        x = tuple(F(int(v), 1 << res) - 4 for v in rng.integers(0, 4 << res, size=2))
        r = tuple(1 + F(int(v), 1 << res) for v in rng.integers(0, 1 << res, size=2))
        yield R, n, LineParams(x, r)


@pytest.mark.parametrize("kind", ["lambda", "mu", "mu_diff"])
def test_float_matches_exact(kind):
    for R, n, L in _random_cases(40, seed={"lambda": 1, "mu": 2, "mu_diff": 3}[kind]):
        exact = line_integral(R, n, L, kind, exact=True).dz
        approx = line_integral(R, n, L.as_float(), kind).dz
        assert approx == pytest.approx(float(exact), rel=1e-9, abs=1e-12)


def test_region_additivity_and_telescoping():
    for R, n, L in _random_cases(30, seed=5):
        delta = F(1, 1 << (n + 2))
        for kind in ("lambda", "mu", "mu_diff"):
            full = line_integral(R, n, L, kind, exact=True).dz
            inside = line_integral(R, n, L, kind, "inside_delta", delta, exact=True).dz
            outside = line_integral(R, n, L, kind, "outside_delta", delta, exact=True).dz
            assert inside + outside == full
        Y0 = line_integral(R, n, L, "mu", exact=True).dz
        Y1 = line_integral(R, n + 1, L, "mu", exact=True).dz
        Z = line_integral(R, n, L, "mu_diff", exact=True).dz
        assert Y1 - Y0 == Z


def test_metric_consistency():
    for R, n, L in _random_cases(10, seed=9):
        for kind in ("lambda", "mu"):
            val = line_integral(R, n, L, kind, exact=True)
            assert val.h1 == pytest.approx(line_speed(L) * float(val.dz))
            assert kind == "lambda" or val.dz >= 0


def test_lambda_matches_product_oracle():
    for R, n, L in _random_cases(15, seed=13):
        sig = sigma_level(R, n)
        oracle = step_product_integral([sig, sig], L)
        assert line_integral(R, n, L, "lambda", exact=True).dz == oracle


def test_y_bound_holds():
    for R, n, L in _random_cases(40, seed=21):
        Y = line_integral(R, n, L.as_float(), "mu").h1
        assert Y <= y_bound(n, 2, R.s)


def test_continuity_defect(realization_08):
    rng = np.random.default_rng(4)
    L = sample_line_in_stratum(3, 2, rng, 16).as_float()
    assert continuity_defect(realization_08, 6, L, L) == 0
    x2 = (L.x[0] + 2**-10, L.x[1])
    L2 = LineParams(x2, L.r)
    a = continuity_defect(realization_08, 6, L, L2)
    assert a == continuity_defect(realization_08, 6, L2, L)
    assert a >= 0
