"""Random Ahlfors-regular Cantor sets built from a {1,2} branching schedule.

Level ``n`` of a realization is the sorted array of indices ``k`` of the
dyadic intervals ``[k 2^-n, (k+1) 2^-n]`` making up ``A_n``.  Level 0 is the
single interval ``[1, 2]`` (index 1).  Step ``n -> n+1`` is governed by
``a_{n+1}``: when it is 2 every child survives, when it is 1 each surviving
interval keeps one child chosen by a hashed coin flip.

Coin flips are counter based.  The bit for cell ``(n, k)`` is the low bit of
``mix(mix(seed + (n+1) G) + (k+1) G)`` where ``G = 0x9E3779B97F4A7C15`` and
``mix`` is the SplitMix64 finalizer (shifts 30/27/31, multipliers
``0xBF58476D1CE4E5B9`` and ``0x94D049BB133111EB``), all mod 2**64.  A
realization therefore does not depend on traversal order.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .dyadic import StepFunction, step_combine

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_M1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_M2)
    z ^= z >> np.uint64(31)
    return z


def choice_bits(seed: int, n: int, indices: np.ndarray) -> np.ndarray:
    """Child-choice bit (0 = left, 1 = right) for cells ``(n, k)``."""
    level_key = mix64((seed & MASK64) + (n + 1) * GOLDEN)
    k = np.asarray(indices, dtype=np.int64).astype(np.uint64)
    state = np.uint64(level_key) + (k + np.uint64(1)) * np.uint64(GOLDEN)
    return (_mix64_array(state) & np.uint64(1)).astype(np.int64)


def exact_dimension(s) -> Fraction:
    """Rational value of a dimension parameter given as float or Fraction."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, str):
        return Fraction(s)
    return Fraction(float(s)).limit_denominator(10**9)


def _pow2_leq(value: int, exponent: Fraction) -> bool:
    """``value <= 2**exponent`` for positive integer value, exactly."""
    p, q = exponent.numerator, exponent.denominator
    if p < 0:
        return False
    return value**q <= 2**p


@dataclass(frozen=True)
class BranchingSchedule:
    s: Fraction
    a: tuple[int, ...]
    beta: tuple[int, ...]

    @property
    def n_max(self) -> int:
        return len(self.a)

    def beta_at(self, n: int) -> int:
        """``beta_n`` with ``beta_0 = 1``."""
        if n == 0:
            return 1
        return self.beta[n - 1]

    def a_at(self, n: int) -> int:
        """``a_n`` for ``1 <= n <= n_max``."""
        return self.a[n - 1]

    def sigma_vanishes(self, n: int) -> bool:
        """True when ``sigma_n = nu_{n+1} - nu_n`` is identically zero."""
        return self.a_at(n + 1) == 2

    def window_holds(self) -> bool:
        s = self.s
        for n in range(1, self.n_max + 1):
            b = self.beta_at(n)
            # 2^{sn-1} < b  <=>  not (b <= 2^{sn-1})
            if _pow2_leq(b, s * n - 1) or not _pow2_leq(b, s * n):
                return False
        return True


def build_schedule(s, n_max: int) -> BranchingSchedule:
    """Greedy schedule: double whenever ``2 beta_n <= 2^{s(n+1)}``."""
    s_exact = exact_dimension(s)
    if not 0 < s_exact < 1:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    a, beta = [], []
    b = 1
    for n in range(n_max):
        if _pow2_leq(2 * b, s_exact * (n + 1)):
            a.append(2)
            b *= 2
        else:
            a.append(1)
        beta.append(b)
    sched = BranchingSchedule(s_exact, tuple(a), tuple(beta))
    assert sched.window_holds()
    return sched


@dataclass(frozen=True, eq=False)
class Realization:
    schedule: BranchingSchedule
    seed: int
    levels: tuple[np.ndarray, ...]

    @property
    def s(self) -> float:
        return float(self.schedule.s)

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> np.ndarray:
        if not 0 <= n <= self.n_max:
            raise ValueError(f"level {n} not sampled (n_max={self.n_max})")
        return self.levels[n]

    def nu_value(self, n: int) -> Fraction:
        """Density ``2^n / beta_n`` of ``nu_n`` on ``A_n``."""
        return Fraction(1 << n, self.schedule.beta_at(n))

    @cached_property
    def _level_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(lv.tolist()) for lv in self.levels)

    def contains_cell(self, n: int, k: int) -> bool:
        return k in self._level_sets[n]

    def to_dict(self) -> dict:
        return {
            "s": str(self.schedule.s),
            "n_max": self.n_max,
            "seed": self.seed,
            "a": list(self.schedule.a[: self.n_max]),
            "beta": list(self.schedule.beta[: self.n_max]),
            "levels": [lv.tolist() for lv in self.levels],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Realization":
        sched = BranchingSchedule(Fraction(data["s"]), tuple(data["a"]), tuple(data["beta"]))
        levels = tuple(_frozen(np.asarray(lv, dtype=np.int64)) for lv in data["levels"])
        return cls(sched, int(data["seed"]), levels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Realization):
            return NotImplemented
        return self.to_json() == other.to_json()


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def sample_realization(
    schedule: BranchingSchedule,
    seed: int,
    n_max: int | None = None,
    prefix: Realization | None = None,
) -> Realization:
    """Sample ``A_0 .. A_{n_max}``.

    With ``prefix`` the levels of ``prefix`` are kept verbatim and only the
    later levels are drawn from ``seed``; this is how realizations sharing a
    common ``A_k`` are produced.
    """
    n_max = schedule.n_max if n_max is None else n_max
    if n_max > schedule.n_max:
        raise ValueError(f"schedule only has {schedule.n_max} levels")
    if prefix is not None:
        levels = list(prefix.levels[: n_max + 1])
    else:
        levels = [_frozen(np.array([1], dtype=np.int64))]
    for n in range(len(levels) - 1, n_max):
        cur = levels[n]
        if schedule.a_at(n + 1) == 2:
            nxt = np.empty(2 * len(cur), dtype=np.int64)
            nxt[0::2] = 2 * cur
            nxt[1::2] = 2 * cur + 1
        else:
            nxt = 2 * cur + choice_bits(seed, n, cur)
        levels.append(_frozen(nxt))
    return Realization(schedule, int(seed), tuple(levels))


def nu_arrays(R: Realization, n: int) -> tuple[int, np.ndarray, float]:
    """(level, sorted cell indices, density) of ``nu_n``."""
    return n, R.level(n), float(R.nu_value(n))


def sigma_arrays(R: Realization, n: int) -> tuple[int, np.ndarray, np.ndarray]:
    """(level n+1, sorted cell indices, float values) of ``sigma_n``.

    Values are ``+c`` on kept children and ``-c`` on dropped ones where
    ``c = 2^n / beta_n``; empty when ``a_{n+1} = 2``.
    """
    R.level(n + 1)
    if R.schedule.sigma_vanishes(n):
        return n + 1, np.empty(0, dtype=np.int64), np.empty(0)
    cur = R.level(n)
    kept = R.level(n + 1)
    idx = np.empty(2 * len(cur), dtype=np.int64)
    idx[0::2] = 2 * cur
    idx[1::2] = 2 * cur + 1
    c = float(R.nu_value(n))
    vals = np.where(np.isin(idx, kept, assume_unique=True), c, -c)
    return n + 1, idx, vals


def nu_level(R: Realization, n: int) -> StepFunction:
    return StepFunction.constant_on(n, R.level(n).tolist(), R.nu_value(n))


def sigma_level(R: Realization, n: int) -> StepFunction:
    if n + 1 > R.n_max:
        raise ValueError(f"sigma_{n} needs level {n + 1} (n_max={R.n_max})")
    return step_combine(1, nu_level(R, n + 1), -1, nu_level(R, n))


def lebesgue_support(R: Realization, n: int) -> Fraction:
    return Fraction(len(R.level(n)), 1 << n)


def ahlfors_ratio(R: Realization, n: int) -> float:
    """max over dyadic I of level <= n of ``nu_n(I) / |I|^s``."""
    cells = R.level(n)
    beta = R.schedule.beta_at(n)
    s = float(R.schedule.s)
    best = 0.0
    for j in range(n + 1):
        _, counts = np.unique(cells >> (n - j), return_counts=True)
        best = max(best, counts.max() / beta * 2.0 ** (j * s))
    return best


def fourier_transform(f: StepFunction, xi: float) -> complex:
    """``int exp(-2 pi i xi y) f(y) dy`` summed cell by cell in closed form."""
    idx, vals = f.as_arrays()
    if len(idx) == 0:
        return 0j
    h = 2.0 ** -f.level
    a = idx * h
    if xi == 0:
        return complex(vals.sum() * h)
    w = -2j * math.pi * xi
    # int_a^{a+h} e^{w y} dy = e^{w a} (e^{w h} - 1) / w
    return complex(np.sum(vals * np.exp(w * a)) * (np.exp(w * h) - 1) / w)
