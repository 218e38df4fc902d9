"""Exact dyadic intervals and piecewise-constant functions on dyadic grids.

A :class:`StepFunction` of level ``n`` is constant on every interval
``[k 2^-n, (k+1) 2^-n)`` and stores only the cells where it is non-zero.
Values are :class:`fractions.Fraction` so that every integral over a union of
dyadic intervals is exact.  ``as_arrays`` gives the float64 mirror used by the
fast numerical paths.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

import numpy as np

Rational = Fraction | int


def to_fraction(value) -> Fraction:
    """Convert ints, floats (exactly) and Fractions to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(float(value))


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval ``[index * 2**-level, (index + 1) * 2**-level]``."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"level must be non-negative, got {self.level}")

    @property
    def left(self) -> Fraction:
        return Fraction(self.index, 1 << self.level)

    @property
    def right(self) -> Fraction:
        return Fraction(self.index + 1, 1 << self.level)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    @property
    def center(self) -> Fraction:
        return Fraction(2 * self.index + 1, 1 << (self.level + 1))

    def endpoints(self) -> tuple[Fraction, Fraction]:
        return self.left, self.right

    def contains(self, other: "DyadicInterval") -> bool:
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index


def make_interval(level: int, index: int) -> DyadicInterval:
    return DyadicInterval(level, index)


def children(interval: DyadicInterval) -> tuple[DyadicInterval, DyadicInterval]:
    n, k = interval.level, interval.index
    return DyadicInterval(n + 1, 2 * k), DyadicInterval(n + 1, 2 * k + 1)


@dataclass(frozen=True)
class StepFunction:
    """Sparse step function on the level-``level`` dyadic grid.

    ``coefficients`` maps cell index to value; unlisted cells are zero.
    Zero values are dropped at construction so the table is the support.
    """

    level: int
    coefficients: Mapping[int, Fraction]
    _keys: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"level must be non-negative, got {self.level}")
        clean = {int(k): to_fraction(v) for k, v in self.coefficients.items()}
        clean = {k: v for k, v in sorted(clean.items()) if v != 0}
        object.__setattr__(self, "coefficients", MappingProxyType(clean))
        object.__setattr__(self, "_keys", tuple(clean))

    @classmethod
    def constant_on(cls, level: int, indices, value) -> "StepFunction":
        value = to_fraction(value)
        return cls(level, {int(k): value for k in indices})

    @classmethod
    def zero(cls, level: int = 0) -> "StepFunction":
        return cls(level, {})

    @property
    def cell_length(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    @property
    def indices(self) -> tuple[int, ...]:
        return self._keys

    def __len__(self) -> int:
        return len(self._keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        level = max(self.level, other.level)
        return dict(self.refine(level).coefficients) == dict(other.refine(level).coefficients)

    def __hash__(self):
        return hash((self.level, tuple(self.coefficients.items())))

    def refine(self, level: int) -> "StepFunction":
        """Same function expressed on a finer grid."""
        if level < self.level:
            raise ValueError("cannot coarsen a step function")
        shift = level - self.level
        if shift == 0:
            return self
        width = 1 << shift
        return StepFunction(
            level,
            {(k << shift) + j: v for k, v in self.coefficients.items() for j in range(width)},
        )

    def sup_abs(self) -> Fraction:
        return max((abs(v) for v in self.coefficients.values()), default=Fraction(0))

    def support_length(self) -> Fraction:
        return len(self._keys) * self.cell_length

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted cell indices (int64) and float64 values."""
        idx = np.fromiter(self._keys, dtype=np.int64, count=len(self._keys))
        vals = np.fromiter(
            (float(self.coefficients[k]) for k in self._keys), dtype=np.float64, count=len(self._keys)
        )
        return idx, vals

    def __call__(self, t) -> Fraction:
        return step_eval(self, t)


def step_eval(f: StepFunction, t) -> Fraction:
    """Value at ``t``; at a cell boundary the right-hand cell wins."""
    t = to_fraction(t)
    k = math.floor(t * (1 << f.level))
    return f.coefficients.get(k, Fraction(0))


def step_integral(f: StepFunction, a, b) -> Fraction:
    """Exact integral of ``f`` over ``[a, b]``."""
    a, b = to_fraction(a), to_fraction(b)
    if a > b:
        raise ValueError(f"need a <= b, got a={a}, b={b}")
    scale = 1 << f.level
    keys = f._keys
    lo = bisect.bisect_left(keys, math.floor(a * scale))
    hi = bisect.bisect_right(keys, math.floor(b * scale))
    total = Fraction(0)
    h = f.cell_length
    for k in keys[lo:hi]:
        left = Fraction(k, scale)
        overlap = min(b, left + h) - max(a, left)
        if overlap > 0:
            total += f.coefficients[k] * overlap
    return total


def step_total(f: StepFunction) -> Fraction:
    return sum(f.coefficients.values(), Fraction(0)) * f.cell_length


def step_combine(c1, f: StepFunction, c2, g: StepFunction) -> StepFunction:
    """``c1 * f + c2 * g`` on the finer of the two grids."""
    c1, c2 = to_fraction(c1), to_fraction(c2)
    level = max(f.level, g.level)
    ff, gg = f.refine(level), g.refine(level)
    out = {k: c1 * v for k, v in ff.coefficients.items()}
    for k, v in gg.coefficients.items():
        out[k] = out.get(k, Fraction(0)) + c2 * v
    return StepFunction(level, out)


def antiderivative_knots(f: StepFunction) -> tuple[np.ndarray, np.ndarray]:
    """Knots and values of ``t -> int_{-inf}^t f`` (piecewise linear, float).

    Between consecutive knots the antiderivative is linear; left of the
    first knot it is 0, right of the last it is constant.
    """
    idx, vals = f.as_arrays()
    h = 2.0 ** -f.level
    if len(idx) == 0:
        return np.zeros(1), np.zeros(1)
    # cell edges including gaps between non-adjacent cells
    lefts = idx * h
    rights = (idx + 1) * h
    knots = np.unique(np.concatenate([lefts, rights]))
    mids = 0.5 * (knots[:-1] + knots[1:])
    pos = np.searchsorted(idx, np.floor(mids / h).astype(np.int64))
    pos = np.minimum(pos, len(idx) - 1)
    seg_vals = np.where(idx[pos] == np.floor(mids / h).astype(np.int64), vals[pos], 0.0)
    cum = np.concatenate([[0.0], np.cumsum(seg_vals * np.diff(knots))])
    return knots, cum
