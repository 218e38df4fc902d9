"""Lines ``L_{x,r}`` in ``R^d`` and integrals of product densities along them.

The line with offsets ``x`` and dilations ``r`` is
``z -> ((z - x_1)/r_1, ..., (z - x_d)/r_d)``.  Integrals are taken in the
parameter ``z`` first (``dz_value``); the arclength version is that number
times the constant speed ``sqrt(sum r_i^-2)``.

Every integrand here is a product of dyadic step functions composed with
affine maps, so it is piecewise constant in ``z``.  The sweep collects the
images of all cell edges, sorts them, and evaluates each factor once per
elementary segment.  With rational ``x``, ``r`` the exact sweep is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .construction import Realization, sigma_arrays
from .dyadic import to_fraction

Z_RANGE = (Fraction(-3), Fraction(4))
KINDS = ("lambda", "mu", "mu_diff")
REGIONS = ("all", "inside_delta", "outside_delta")


@dataclass(frozen=True)
class LineParams:
    x: tuple
    r: tuple

    def __post_init__(self):
        x, r = tuple(self.x), tuple(self.r)
        if len(x) != len(r):
            raise ValueError("x and r must have the same length")
        if len(x) < 2:
            raise ValueError("need d >= 2")
        for xi in x:
            if not -4 <= xi <= 0:
                raise ValueError(f"offset {xi} outside [-4, 0]")
        for ri in r:
            if not 1 <= ri <= 2:
                raise ValueError(f"dilation {ri} outside [1, 2]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "r", r)

    @property
    def d(self) -> int:
        return len(self.x)

    @property
    def speed(self) -> float:
        return line_speed(self)

    def exact(self) -> "LineParams":
        return LineParams(tuple(map(to_fraction, self.x)), tuple(map(to_fraction, self.r)))

    def as_float(self) -> "LineParams":
        return LineParams(tuple(map(float, self.x)), tuple(map(float, self.r)))

    def point(self, z) -> tuple:
        return tuple((z - xi) / ri for xi, ri in zip(self.x, self.r))

    def distance(self, other: "LineParams") -> float:
        """``|x - x'|_1 + |r - r'|_1``."""
        return float(
            sum(abs(a - b) for a, b in zip(self.x, other.x))
            + sum(abs(a - b) for a, b in zip(self.r, other.r))
        )


@dataclass(frozen=True)
class SeparationStratum:
    """``m`` with ``4 2^-m < min gap <= 4 2^{1-m}``; ``math.inf`` on the diagonal."""

    m: float

    @property
    def on_diagonal(self) -> bool:
        return self.m == math.inf

    def contains_gap(self, gap) -> bool:
        if self.on_diagonal:
            return gap == 0
        return 4 * 2.0 ** -self.m < gap <= 4 * 2.0 ** (1 - self.m)


class LineIntegral(NamedTuple):
    dz: object
    h1: float


def line_speed(L: LineParams) -> float:
    return math.sqrt(sum(1.0 / float(ri) ** 2 for ri in L.r))


def min_gap(x: Sequence):
    return min(abs(x[i] - x[j]) for i in range(len(x)) for j in range(i + 1, len(x)))


def classify_separation(x: Sequence) -> SeparationStratum:
    gap = min_gap(x)
    if gap == 0:
        return SeparationStratum(math.inf)
    if gap > 4:
        raise ValueError(f"gap {gap} exceeds 4; offsets must lie in [-4, 0]")
    m = 1
    # powers of two are exact in both float and Fraction arithmetic
    while gap <= Fraction(4, 1 << m):
        m += 1
    return SeparationStratum(m)


def z_window(L: LineParams):
    """``(lo, hi)`` where every coordinate lies in [1, 2], or ``None``."""
    lo = max(xi + ri for xi, ri in zip(L.x, L.r))
    hi = min(xi + 2 * ri for xi, ri in zip(L.x, L.r))
    if lo > hi:
        return None
    return lo, hi


def _merge(intervals: list) -> list:
    intervals = sorted(intervals)
    out: list = []
    for lo, hi in intervals:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def diagonal_zset(L: LineParams, delta) -> list:
    """Union over pairs of ``{z in [-3,4] : |phi_i(z) - phi_j(z)| < delta}``.

    Returned as a sorted list of disjoint ``(lo, hi)`` pairs; endpoints are
    exact when ``L`` and ``delta`` are rational.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    exact = all(isinstance(v, (Fraction, int)) for v in (*L.x, *L.r, delta))
    zlo, zhi = Z_RANGE if exact else tuple(map(float, Z_RANGE))
    one = Fraction(1) if exact else 1.0
    pieces = []
    d = L.d
    for i in range(d):
        for j in range(i + 1, d):
            slope = one / L.r[i] - one / L.r[j]
            const = L.x[j] / L.r[j] - L.x[i] / L.r[i]
            if slope == 0:
                if abs(const) < delta:
                    pieces.append((zlo, zhi))
                continue
            a = (-delta - const) / slope
            b = (delta - const) / slope
            lo, hi = min(a, b), max(a, b)
            lo, hi = max(lo, zlo), min(hi, zhi)
            if lo < hi:
                pieces.append((lo, hi))
    return _merge(pieces)


# --- factor tables -------------------------------------------------------
#
# A "column" is the list of per-coordinate step functions whose product is
# integrated.  mu_diff uses two columns (levels n+1 and n) and subtracts.


def _float_columns(R: Realization, n: int, kind: str):
    if kind == "lambda":
        level, idx, vals = sigma_arrays(R, n)
        return [(level, idx, vals)], (1.0,)
    if kind == "mu":
        idx = R.level(n)
        return [(n, idx, np.full(len(idx), float(R.nu_value(n))))], (1.0,)
    if kind == "mu_diff":
        nxt = R.level(n + 1)
        cur = R.level(n)
        return [
            (n + 1, nxt, np.full(len(nxt), float(R.nu_value(n + 1)))),
            (n, cur, np.full(len(cur), float(R.nu_value(n)))),
        ], (1.0, -1.0)
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def _exact_columns(R: Realization, n: int, kind: str):
    if kind == "lambda":
        level, idx, _ = sigma_arrays(R, n)
        c = R.nu_value(n)
        table = {int(k): (c if R.contains_cell(n + 1, int(k)) else -c) for k in idx}
        return [(level, table)], (1,)
    if kind == "mu":
        c = R.nu_value(n)
        return [(n, dict.fromkeys(R.level(n).tolist(), c))], (1,)
    if kind == "mu_diff":
        c1, c0 = R.nu_value(n + 1), R.nu_value(n)
        return [
            (n + 1, dict.fromkeys(R.level(n + 1).tolist(), c1)),
            (n, dict.fromkeys(R.level(n).tolist(), c0)),
        ], (1, -1)
    raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")


def _region_check(region: str, delta):
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}; expected one of {REGIONS}")
    if region != "all" and (delta is None or delta <= 0):
        raise ValueError("restricted regions need delta > 0")


def _sweep_exact(L: LineParams, columns, weights, region: str, delta) -> Fraction:
    win = z_window(L)
    if win is None:
        return Fraction(0)
    lo, hi = win
    points = {lo, hi}
    for level, table in columns:
        scale = 1 << level
        for xi, ri in zip(L.x, L.r):
            tlo, thi = (lo - xi) / ri, (hi - xi) / ri
            klo, khi = math.floor(tlo * scale), math.floor(thi * scale)
            for k in table:
                if klo <= k <= khi:
                    for e in (k, k + 1):
                        z = xi + ri * Fraction(e, scale)
                        if lo < z < hi:
                            points.add(z)
    if region != "all":
        for a, b in diagonal_zset(L, delta):
            for z in (a, b):
                if lo < z < hi:
                    points.add(z)
    pts = sorted(points)
    d = L.d
    total = Fraction(0)
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        ts = [(mid - xi) / ri for xi, ri in zip(L.x, L.r)]
        if region != "all":
            inside = any(abs(ts[i] - ts[j]) < delta for i in range(d) for j in range(i + 1, d))
            if inside != (region == "inside_delta"):
                continue
        seg = Fraction(0)
        for (level, table), w in zip(columns, weights):
            scale = 1 << level
            prod = Fraction(1)
            for t in ts:
                v = table.get(math.floor(t * scale))
                if v is None:
                    prod = Fraction(0)
                    break
                prod *= v
            seg += w * prod
        if seg:
            total += seg * (b - a)
    return total


def _sweep_float(L: LineParams, columns, weights, region: str, delta) -> float:
    win = z_window(L)
    if win is None:
        return 0.0
    lo, hi = float(win[0]), float(win[1])
    xs = [float(v) for v in L.x]
    rs = [float(v) for v in L.r]
    chunks = [np.array([lo, hi])]
    for level, idx, _ in columns:
        if len(idx) == 0:
            continue
        h = 2.0 ** -level
        for xi, ri in zip(xs, rs):
            klo = math.floor((lo - xi) / ri / h) - 1
            khi = math.floor((hi - xi) / ri / h) + 1
            a, b = np.searchsorted(idx, [klo, khi + 1])
            sel = idx[a:b]
            if len(sel):
                chunks.append(xi + ri * (sel * h))
                chunks.append(xi + ri * ((sel + 1) * h))
    if region != "all":
        for a, b in diagonal_zset(L.as_float(), float(delta)):
            chunks.append(np.array([a, b]))
    pts = np.unique(np.concatenate(chunks))
    pts = pts[(pts >= lo) & (pts <= hi)]
    if len(pts) < 2:
        return 0.0
    mids = 0.5 * (pts[:-1] + pts[1:])
    lens = np.diff(pts)
    ts = [(mids - xi) / ri for xi, ri in zip(xs, rs)]
    keep = np.ones(len(mids), dtype=bool)
    if region != "all":
        inside = np.zeros(len(mids), dtype=bool)
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                inside |= np.abs(ts[i] - ts[j]) < float(delta)
        keep = inside if region == "inside_delta" else ~inside
    seg = np.zeros(len(mids))
    for (level, idx, vals), w in zip(columns, weights):
        if len(idx) == 0:
            continue
        scale = 2.0**level
        prod = np.ones(len(mids))
        for t in ts:
            k = np.floor(t * scale).astype(np.int64)
            pos = np.searchsorted(idx, k)
            pos_c = np.minimum(pos, len(idx) - 1)
            hit = idx[pos_c] == k
            prod *= np.where(hit, vals[pos_c], 0.0)
        seg += w * prod
    return float(np.sum(seg * lens * keep))


def line_integral(
    R: Realization,
    n: int,
    L: LineParams,
    kind: str = "lambda",
    region: str = "all",
    delta=None,
    exact: bool = False,
) -> LineIntegral:
    """Integral along ``L`` of ``lambda_n``, ``mu_n`` or ``mu_{n+1} - mu_n``.

    ``dz`` is the integral in the line parameter, ``h1`` the arclength
    integral.  In exact mode ``dz`` is a Fraction (``x``, ``r`` and
    ``delta`` are converted exactly from their float values).
    """
    _region_check(region, delta)
    if exact:
        Le = L.exact()
        de = None if delta is None else to_fraction(delta)
        columns, weights = _exact_columns(R, n, kind)
        dz = _sweep_exact(Le, columns, weights, region, de)
        return LineIntegral(dz, line_speed(L) * float(dz))
    columns, weights = _float_columns(R, n, kind)
    dz = _sweep_float(L, columns, weights, region, delta)
    return LineIntegral(dz, line_speed(L) * dz)


def step_product_integral(functions, L: LineParams) -> Fraction:
    """Exact ``int prod_i f_i((z - x_i)/r_i) dz`` for dyadic step functions."""
    if len(functions) != L.d:
        raise ValueError("need one step function per coordinate")
    Le = L.exact()
    # one column whose factors differ per coordinate: evaluate by hand
    win = z_window(Le)
    if win is None:
        return Fraction(0)
    lo, hi = win
    points = {lo, hi}
    for f, xi, ri in zip(functions, Le.x, Le.r):
        scale = 1 << f.level
        for k in f.indices:
            for e in (k, k + 1):
                z = xi + ri * Fraction(e, scale)
                if lo < z < hi:
                    points.add(z)
    pts = sorted(points)
    total = Fraction(0)
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        prod = Fraction(1)
        for f, xi, ri in zip(functions, Le.x, Le.r):
            prod *= f((mid - xi) / ri)
            if not prod:
                break
        total += prod * (b - a)
    return total


def continuity_defect(R: Realization, n: int, L: LineParams, L2: LineParams) -> float:
    """``|X_n(L) - X_n(L')| / (2^{n(d+s-ds)} (|x-x'|_1 + |r-r'|_1))``."""
    dist = L.distance(L2)
    if dist == 0:
        return 0.0
    d = L.d
    s = R.s
    diff = abs(line_integral(R, n, L).h1 - line_integral(R, n, L2).h1)
    return diff / (2.0 ** (n * (d + s - d * s)) * dist)
