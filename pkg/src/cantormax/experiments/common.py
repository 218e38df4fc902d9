"""Configuration, reports, slope fits and the deterministic trial runner."""
from __future__ import annotations

import json
import math
from fractions import Fraction
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

SCHEMA_VERSION = "1.0"


@dataclass(frozen=True)
class ExperimentConfig:
    s: float = 0.8
    d: int = 2
    seed: int = 0
    trials: int = 100
    m: int = 3
    n_range: tuple[int, int] = (6, 14)
    theta: float | None = None
    xi: float | None = None
    x: tuple | None = None
    r: tuple | None = None
    x_spacing: float = 2.0**-4
    r_spacing: float = 2.0**-2
    max_net_points: int = 20000
    slope_max: float | None = None
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        lo, hi = self.n_range
        if lo > hi:
            raise ValueError(f"empty n_range {self.n_range}")
        for name in ("x_spacing", "r_spacing"):
            h = getattr(self, name)
            if h <= 0 or not math.log2(h).is_integer():
                raise ValueError(f"{name} must be a power of two, got {h}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["n_range"] = list(self.n_range)
        for key in ("x", "r"):
            if out[key] is not None:
                out[key] = [float(v) for v in out[key]]
        # thread count never influences results
        out.pop("threads")
        return out


@dataclass
class ExperimentReport:
    name: str
    config: dict
    stats: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "config": self.config,
            "stats": self.stats,
            "verdicts": self.verdicts,
            "passed": self.passed,
            "tables": self.tables,
        }

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), sort_keys=True, indent=2) + "\n"


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return obj
    return obj


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual: float
    points: int


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> SlopeFit | None:
    """Ordinary least squares ``y = slope * x + intercept``; None below 2 points."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or np.ptp(xs) == 0:
        return None
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = float(np.linalg.norm(A @ coef - ys))
    return SlopeFit(float(coef[0]), float(coef[1]), resid, len(xs))


def run_trials(fn: Callable[[int], Any], trials: int, threads: int = 1) -> list:
    """``[fn(0), ..., fn(trials-1)]`` in index order, optionally threaded."""
    if threads <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))
