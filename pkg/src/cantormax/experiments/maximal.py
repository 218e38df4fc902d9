"""Discretized maximal operator at level n and the sharpness experiment."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..construction import Realization, nu_arrays, nu_level
from ..dyadic import StepFunction, make_interval, step_integral
from .common import ExperimentReport, fit_slope


def _nu_cdf(R: Realization, n: int):
    """Knots and values of ``t -> nu_n((-inf, t])``."""
    level, idx, c = nu_arrays(R, n)
    h = 2.0**-level
    lefts = idx * h
    knots = np.unique(np.concatenate([lefts, lefts + h]))
    mids = 0.5 * (knots[:-1] + knots[1:])
    inside = np.isin(np.floor(mids / h).astype(np.int64), idx)
    values = np.concatenate([[0.0], np.cumsum(np.where(inside, c, 0.0) * np.diff(knots))])
    return knots, values


def _grid(grid, lo: float, hi: float, name: str) -> np.ndarray:
    if np.ndim(grid) == 0:
        h = float(grid)
        if not h > 0:
            raise ValueError(f"{name} spacing must be positive, got {grid}")
        return np.arange(math.floor(lo / h), math.ceil(hi / h) + 1) * h
    arr = np.asarray(grid, dtype=float)
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    return arr


def _runs(idx: np.ndarray, vals: np.ndarray, h: float):
    """Merge adjacent cells with equal values into intervals."""
    brk = np.flatnonzero((np.diff(idx) != 1) | (np.diff(vals) != 0)) + 1
    starts = np.concatenate([[0], brk])
    ends = np.concatenate([brk, [len(idx)]])
    return idx[starts] * h, (idx[ends - 1] + 1) * h, vals[starts]


@dataclass
class MaximalSample:
    x: np.ndarray
    values: np.ndarray
    best_r: np.ndarray
    x_spacing: float | None

    def lq_norm(self, q: float) -> float:
        """Riemann sum of ``|Mf|^q`` on the x-grid (needs a uniform grid)."""
        h = self.x_spacing
        if h is None:
            h = float(np.mean(np.diff(self.x))) if len(self.x) > 1 else 1.0
        return float((np.sum(np.abs(self.values) ** q) * h) ** (1.0 / q))


def maximal_apply(
    R: Realization,
    n: int,
    f: StepFunction,
    x_grid=2.0**-6,
    r_grid=None,
    extra_r=None,
    chunk: int = 1 << 22,
) -> MaximalSample:
    """``max_r int |f|(x + r y) nu_n(y) dy`` for every grid x.

    ``x_grid`` and ``r_grid`` are spacings or explicit arrays; the r-grid
    defaults to spacing ``2^-n`` on ``[1, 2]``.  ``extra_r(x)`` may add
    per-x candidate dilations (array of shape ``(len(x), j)``).  The inner
    integral is exact: ``sum_j |f_j| (F((b_j - x)/r) - F((a_j - x)/r))`` with
    ``F`` the distribution function of ``nu_n``.
    """
    idx, vals = f.as_arrays()
    h = 2.0**-f.level
    if len(idx):
        lo, hi = idx[0] * h - 4.0, (idx[-1] + 1) * h - 1.0
    else:
        lo, hi = -4.0, 0.0
    xs = _grid(x_grid, lo, hi, "x_grid")
    rs = _grid(2.0**-n if r_grid is None else r_grid, 1.0, 2.0, "r_grid")
    rs = rs[(rs >= 1) & (rs <= 2)]
    if rs.size == 0:
        raise ValueError("r_grid has no points in [1, 2]")
    x_spacing = float(x_grid) if np.ndim(x_grid) == 0 else None
    if len(idx) == 0:
        zeros = np.zeros(len(xs))
        return MaximalSample(xs, zeros, np.ones(len(xs)), x_spacing)
    knots, cdf = _nu_cdf(R, n)
    a, b, w = _runs(idx, np.abs(vals), h)
    r_all = np.broadcast_to(rs, (len(xs), len(rs)))
    if extra_r is not None:
        extra = np.asarray(extra_r(xs), dtype=float).reshape(len(xs), -1)
        extra = np.where((extra >= 1) & (extra <= 2), extra, 1.0)
        r_all = np.concatenate([r_all, extra], axis=1)
    best = np.empty(len(xs))
    arg = np.empty(len(xs))
    per_x = r_all.shape[1] * len(a)
    step = max(1, chunk // max(per_x, 1))
    for s0 in range(0, len(xs), step):
        x = xs[s0 : s0 + step, None, None]
        r = r_all[s0 : s0 + step, :, None]
        up = np.interp((b[None, None, :] - x) / r, knots, cdf)
        down = np.interp((a[None, None, :] - x) / r, knots, cdf)
        total = np.sum(w * (up - down), axis=2)
        j = np.argmax(total, axis=1)
        best[s0 : s0 + step] = total[np.arange(len(j)), j]
        arg[s0 : s0 + step] = r_all[s0 : s0 + step][np.arange(len(j)), j]
    return MaximalSample(xs, best, arg, x_spacing)


def lp_norm(f: StepFunction, p: float) -> float:
    idx, vals = f.as_arrays()
    return float((np.sum(np.abs(vals) ** p) * 2.0**-f.level) ** (1.0 / p))


def maximal_ratio(R, n, f, p, q, x_grid=2.0**-6, r_grid=None, extra_r=None) -> float:
    """``||M^(n) f||_q / ||f||_p`` on the sampled grid."""
    norm = lp_norm(f, p)
    if norm == 0:
        raise ValueError("f vanishes; the ratio is undefined")
    return maximal_apply(R, n, f, x_grid, r_grid, extra_r).lq_norm(q) / norm


def indicator(level: int, lo: Fraction, hi: Fraction) -> StepFunction:
    """``1[lo, hi]`` for dyadic endpoints at the given level."""
    scale = 1 << level
    i0, i1 = lo * scale, hi * scale
    if i0.denominator != 1 or i1.denominator != 1:
        raise ValueError("endpoints are not on the level grid")
    return StepFunction.constant_on(level, range(int(i0), int(i1)), 1)


def sharpness_point(R: Realization, n: int) -> Fraction:
    """Centre of the leftmost surviving level-n cell."""
    return make_interval(n, int(R.level(n)[0])).center


def sharpness_experiment(
    s,
    p: float,
    q: float,
    delta_list: Sequence,
    R: Realization,
    n: int,
    x_spacing: float = 2.0**-7,
    r_spacing: float | None = None,
    tolerance: float = 0.03,
) -> ExperimentReport:
    """Slope of ``log2(||M f_delta||_q / ||f_delta||_p)`` against ``log2 delta``.

    ``f_delta = 1[x0 - 2 delta, x0 + 2 delta]`` with ``x0`` in ``A_n``; the
    r-grid is augmented by the aiming dilation ``r = 1 - x/x0``.
    """
    deltas = [Fraction(dl) if not isinstance(dl, Fraction) else dl for dl in delta_list]
    if not deltas:
        raise ValueError("delta_list is empty")
    for dl in deltas:
        if dl <= 0 or dl.numerator != 1 or dl.denominator & (dl.denominator - 1):
            raise ValueError(f"delta {dl} is not a power of two")
        if dl < Fraction(1, 1 << n):
            raise ValueError(f"delta {dl} is below the grid resolution 2^-{n}")
    x0 = sharpness_point(R, n)
    x0f = float(x0)
    level = max(n + 2, max(dl.denominator.bit_length() + 1 for dl in deltas))
    rows = []
    witness_ok = True
    for dl in deltas:
        f = indicator(level, x0 - 2 * dl, x0 + 2 * dl)
        sample = maximal_apply(
            R, n, f, x_spacing, r_spacing, extra_r=lambda x: 1.0 - x / x0f
        )
        norm_f = lp_norm(f, p)
        ratio = sample.lq_norm(q) / norm_f
        mass = float(step_integral(nu_level(R, n), x0 - dl, x0 + dl))
        on_i = (sample.x >= -x0f) & (sample.x <= 0)
        witness_ok &= bool(np.all(sample.values[on_i] >= mass * (1 - 1e-12)))
        rows.append(
            {
                "delta": float(dl),
                "norm_f": norm_f,
                "norm_f_expected": float(4 * dl) ** (1.0 / p),
                "norm_Mf": sample.lq_norm(q),
                "ratio": ratio,
                "witness_mass": mass,
            }
        )
    fit = fit_slope([math.log2(r["delta"]) for r in rows], [math.log2(r["ratio"]) for r in rows])
    s = float(s)
    expected = s - 1.0 / p
    rep = ExperimentReport(
        "sharpness",
        {"s": s, "p": p, "q": q, "n": n, "deltas": [float(dl) for dl in deltas],
         "x_spacing": x_spacing, "r_spacing": r_spacing if r_spacing is not None else 2.0**-n,
         "seed": R.seed, "x0": x0f},
    )
    rep.stats = {
        "slope": fit.slope if fit else None,
        "residual": fit.residual if fit else None,
        "expected_slope": expected,
    }
    if p < 1.0 / s:
        rep.verdicts["slope"] = fit is not None and abs(fit.slope - expected) <= tolerance
    else:
        rep.verdicts["slope_nonnegative"] = fit is not None and fit.slope >= -tolerance
    rep.verdicts["witness_lower_bound"] = witness_ok
    rep.tables["per_delta"] = rows
    return rep

