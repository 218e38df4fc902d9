from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cantormax.dyadic import (
    StepFunction,
    antiderivative_knots,
    children,
    make_interval,
    step_combine,
    step_eval,
    step_integral,
    step_total,
)

F = Fraction


def test_make_interval_examples():
    assert make_interval(0, 1).endpoints() == (1, 2)
    assert make_interval(1, 2).endpoints() == (1, F(3, 2))
    assert make_interval(3, 9).endpoints() == (F(9, 8), F(5, 4))
    assert make_interval(5, 3).length == F(1, 32)
    with pytest.raises(ValueError):
        make_interval(-1, 0)


def test_children():
    left, right = children(make_interval(0, 1))
    assert left.endpoints() == (1, F(3, 2)) and right.endpoints() == (F(3, 2), 2)
    left, right = children(make_interval(1, 2))
    assert left.endpoints() == (1, F(5, 4)) and right.endpoints() == (F(5, 4), F(3, 2))
    assert left.level == 2 and left.index == 4


def _nu0():
    return StepFunction.constant_on(0, [1], 1)


def _sigma0():
    # A_1 = [1, 1.5] at s = 1/2: nu_1 = 2 on [1, 1.5]
    nu1 = StepFunction.constant_on(1, [2], 2)
    return step_combine(1, nu1, -1, _nu0())


def test_step_eval_examples():
    assert step_eval(_nu0(), F(13, 10)) == 1
    assert step_eval(_nu0(), F(5, 2)) == 0
    assert step_eval(_sigma0(), F(17, 10)) == -1
    # right-cell convention at a shared endpoint
    assert step_eval(_sigma0(), F(3, 2)) == -1
    assert step_eval(_sigma0(), 1) == 1


def test_step_integral_examples():
    assert step_integral(_nu0(), 1, 2) == 1
    assert step_integral(_sigma0(), 1, 2) == 0
    assert step_integral(_sigma0(), 1, F(5, 4)) == F(1, 4)
    with pytest.raises(ValueError):
        step_integral(_nu0(), 2, 1)


def test_step_combine_examples():
    nu1 = StepFunction.constant_on(1, [2], 2)
    sigma = step_combine(1, nu1, -1, _nu0())
    assert sigma.level == 1
    assert dict(sigma.coefficients) == {2: 1, 3: -1}
    same = step_combine(1, nu1, 0, StepFunction.constant_on(3, [8], 5))
    assert same.level == 3 and same == nu1


steps = st.builds(
    lambda level, items: StepFunction(level, {k: F(v, 4) for k, v in items}),
    st.integers(0, 4),
    st.lists(st.tuples(st.integers(-20, 40), st.integers(-8, 8)), max_size=8),
)
dyadic_points = st.builds(lambda k: F(k, 64), st.integers(-200, 300))


@settings(max_examples=80, deadline=None)
@given(steps, dyadic_points, dyadic_points, dyadic_points)
def test_integral_additivity(f, a, b, c):
    a, b, c = sorted((a, b, c))
    assert step_integral(f, a, c) == step_integral(f, a, b) + step_integral(f, b, c)


@settings(max_examples=80, deadline=None)
@given(steps, steps, st.integers(-3, 3), st.integers(-3, 3), dyadic_points, dyadic_points)
def test_combine_bilinear(f, g, c1, c2, a, b):
    a, b = sorted((a, b))
    h = step_combine(c1, f, c2, g)
    assert h.level == max(f.level, g.level)
    assert step_integral(h, a, b) == c1 * step_integral(f, a, b) + c2 * step_integral(g, a, b)


@settings(max_examples=60, deadline=None)
@given(steps, dyadic_points, dyadic_points)
def test_refinement_invariance(f, t, a):
    g = f.refine(f.level + 1)
    assert g == f
    assert step_eval(g, t) == step_eval(f, t)
    lo, hi = sorted((t, a))
    assert step_integral(g, lo, hi) == step_integral(f, lo, hi)


def test_refine_rejects_coarsening():
    f = StepFunction.constant_on(2, [4], 1)
    with pytest.raises(ValueError):
        f.refine(1)


def test_antiderivative_matches_integral():
    f = StepFunction(2, {4: F(3), 5: F(-1), 7: F(2)})
    knots, values = antiderivative_knots(f)
    for t in (1.1, 1.3, 1.6, 1.9, 2.5):
        exact = step_integral(f, knots[0], F(t))
        assert np.interp(t, knots, values) == pytest.approx(float(exact))
    assert values[-1] == pytest.approx(float(step_total(f)))


def test_zero_coefficients_dropped():
    f = StepFunction(1, {2: F(0), 3: F(1)})
    assert f.indices == (3,) and len(f) == 1
