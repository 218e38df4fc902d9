"""Empirical Fourier-decay scan of ``nu_n`` (a heuristic Salem check)."""
from __future__ import annotations

import math

import numpy as np

from ..construction import Realization, nu_arrays


def nu_fourier(R: Realization, n: int, xi: np.ndarray) -> np.ndarray:
    """``hat nu_n(xi) = int e^{-2 pi i xi y} nu_n(y) dy`` for an array of frequencies."""
    level, idx, c = nu_arrays(R, n)
    h = 2.0**-level
    xi = np.asarray(xi, dtype=float)
    a = idx * h
    out = np.empty(xi.shape, dtype=complex)
    flat = xi.ravel()
    res = out.ravel()
    step = max(1, (1 << 22) // max(len(a), 1))
    for s0 in range(0, len(flat), step):
        x = flat[s0 : s0 + step, None]
        phase = -2 * math.pi * x * a[None, :]
        ssum = np.cos(phase).sum(axis=1) + 1j * np.sin(phase).sum(axis=1)
        # cell factor int_0^h e^{-2 pi i xi y} dy, with its xi -> 0 limit
        xs = flat[s0 : s0 + step]
        w = -2j * math.pi * xs
        with np.errstate(invalid="ignore", divide="ignore"):
            cell = np.where(xs == 0, h, (np.exp(w * h) - 1) / np.where(xs == 0, 1, w))
        res[s0 : s0 + step] = c * ssum * cell
    return out


def salem_scan(
    R: Realization,
    n: int,
    xi_max: float,
    eps: float,
    sign: int = 1,
    refine_top: int = 8,
    refine_points: int = 33,
) -> float:
    """``sup_{xi in [2, xi_max]} |xi|^{(s-eps)/2} |hat nu_n(xi)|``.

    The scan uses the integer grid plus a local refinement of width 1 around
    the ``refine_top`` best integers.  ``sign=-1`` scans the mirrored range.
    """
    s = R.s
    if xi_max < 2:
        raise ValueError(f"xi_max must be >= 2, got {xi_max}")
    if not 0 < eps < s:
        raise ValueError(f"eps must lie in (0, s={s}), got {eps}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    grid = np.arange(2, math.floor(xi_max) + 1, dtype=float)
    if grid[-1] < xi_max:
        grid = np.append(grid, float(xi_max))
    stat = _weighted(R, n, grid, s, eps, sign)
    top = grid[np.argsort(-stat, kind="stable")[:refine_top]]
    local = np.concatenate(
        [np.linspace(max(2.0, t - 0.5), min(float(xi_max), t + 0.5), refine_points) for t in np.sort(top)]
    )
    return float(max(stat.max(), _weighted(R, n, local, s, eps, sign).max()))


def _weighted(R, n, xi, s, eps, sign):
    return np.abs(xi) ** ((s - eps) / 2) * np.abs(nu_fourier(R, n, sign * xi))
