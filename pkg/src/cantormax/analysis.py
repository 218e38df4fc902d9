"""Exponent calculus, deterministic bounds and tail thresholds.

Rates are base 2 throughout: a decay ``K exp(-theta k)`` is read as
``K 2^{-theta k}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .construction import exact_dimension


@dataclass(frozen=True)
class ExponentProfile:
    s: float
    d: int
    theta0: float
    xi0: float
    p0: float
    sharp_lower: float
    lp_p0: float | None

    def q_max(self, p: float) -> float:
        """Largest admissible target exponent for a given ``p > p0``."""
        if p <= self.p0:
            raise ValueError(f"p={p} is not above p0={self.p0}")
        return p / (self.p0 - 1)

    def q_range(self, p: float) -> tuple[float, float]:
        return p, self.q_max(p)


def even_dimension(s) -> int:
    """``d = 2 ceil(1/(2-2s) - 1)``, computed exactly."""
    s = exact_dimension(s)
    return 2 * math.ceil(1 / (2 - 2 * s) - 1)


def _p0(theta: Fraction, xi: Fraction, d: int) -> Fraction:
    return ((2 + d) * theta + d * xi) / ((1 + d) * theta + (d - 1) * xi)


def exponent_profile(s, exact: bool = False) -> ExponentProfile:
    """Exponents for dimension ``s``; ``exact=True`` keeps rational fields as Fractions."""
    se = exact_dimension(s)
    if not Fraction(1, 2) < se < 1:
        raise ValueError(f"s must lie in (1/2, 1); no bound is available for s={s}")
    d = even_dimension(se)
    theta0 = (d * se + 1 - d) / 2
    xi0 = d + 1 - (d + 2) * se
    p0 = _p0(theta0, xi0, d)
    conv = (lambda v: v) if exact else float
    lp = conv((2 - se) / se) if se > Fraction(2, 3) else None
    return ExponentProfile(
        s=conv(se),
        d=d,
        theta0=conv(theta0),
        xi0=conv(xi0),
        p0=conv(p0),
        sharp_lower=conv(1 / se),
        lp_p0=lp,
    )

def p0_from_rates(theta: float, xi: float, d: int) -> float:
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if xi < 0:
        raise ValueError(f"xi must be non-negative, got {xi}")
    if d < 2 or d % 2:
        raise ValueError(f"d must be an even integer >= 2, got {d}")
    return ((2 + d) * theta + d * xi) / ((1 + d) * theta + (d - 1) * xi)


def interpolation_exponent(u: float, d: int) -> float:
    """``q_u`` with ``1/q_u = u/d + (1-u)/(d+2)``; ``u = 0`` gives the limit d+2."""
    if not 0 <= u <= 1:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    return d * (d + 2) / (2 * u + d)


def hj_tail_bound(a: float, D: int, N: int, Rbound: float) -> float:
    """``2 exp(-2 a^2 / ((D+1) N R^2))``, not clipped at 1.

    The inequality is valid when every summand takes values in an interval
    of length ``Rbound`` (for symmetric variables, twice their sup norm).
    """
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if D < 0 or N < 1 or Rbound <= 0:
        raise ValueError("need D >= 0, N >= 1 and Rbound > 0")
    return 2.0 * math.exp(-2.0 * a * a / ((D + 1) * N * Rbound * Rbound))


def y_bound(m: int, d: int, s: float) -> float:
    """Deterministic bound ``2^{d+1} sqrt(d) 2^{m(d-1)(1-s)}`` on ``Y_m``.

    The length of ``L_{x,r}`` inside ``A_m^d`` is at most
    ``sqrt(d) * 2 * |A_m| <= sqrt(d) 2^{1+m(s-1)}`` and ``mu_m`` is at most
    ``(2 * 2^{m(1-s)})^d``.
    """
    return 2.0 ** (d + 1) * math.sqrt(d) * 2.0 ** (m * (d - 1) * (1 - s))


def tail_threshold(
    m: int,
    n: int,
    d: int,
    s: float,
    *,
    theta: float | None = None,
    xi: float | None = None,
    C1: float = 1.0,
) -> float:
    """Exceedance threshold of the key tail lemmas.

    Give exactly one of ``theta`` (transversal regime ``s > 1 - 1/d``) or
    ``xi`` (regime ``s <= 1 - 1/d``).
    """
    if n < m:
        raise ValueError(f"need n >= m, got n={n}, m={m}")
    if (theta is None) == (xi is None):
        raise ValueError("give exactly one of theta or xi")
    se = exact_dimension(s)
    s = float(se)
    if theta is not None:
        if not se > 1 - Fraction(1, d):
            raise ValueError(f"theta-form needs s > 1 - 1/d; got s={s}, d={d}")
        upper = (d * s + 1 - d) / 2
        if not 0 < theta < upper:
            raise ValueError(f"theta-form needs 0 < theta < (ds+1-d)/2 = {upper}; got {theta}")
        return C1 * (
            2.0 ** (m * s + n * (d - 1 - d * s))
            + 2.0 ** (m * (d - 1) * (1 - s) / 2) * 2.0 ** (-theta * n)
        )
    if not se <= 1 - Fraction(1, d):
        raise ValueError(f"xi-form needs s <= 1 - 1/d; got s={s}, d={d}")
    if not xi > d - 1 - d * s:
        raise ValueError(f"xi-form needs xi > d-1-ds = {d - 1 - d * s}; got {xi}")
    return C1 * 2.0 ** (m * s) * 2.0 ** (n * xi)
