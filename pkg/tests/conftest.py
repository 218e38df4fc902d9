from fractions import Fraction

import pytest

from cantormax.construction import build_schedule, sample_realization


@pytest.fixture(scope="session")
def half_realization():
    """s = 1/2 realization whose first level keeps the left child, A_1 = [1, 1.5]."""
    R = sample_realization(build_schedule(Fraction(1, 2), 8), 0)
    assert R.level(1).tolist() == [2]
    return R


@pytest.fixture(scope="session")
def realization_08():
    return sample_realization(build_schedule(Fraction(4, 5), 12), 11)
