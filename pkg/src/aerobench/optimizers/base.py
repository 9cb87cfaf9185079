"""Shared run machinery: budget accounting, trajectories, FD gradients."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..problems.base import MAXIMIZE, ProblemEnvironment
from ..space import DesignPoint

FD_EPS = 1e-4


class ConfigurationError(ValueError):
    """Invalid optimizer configuration or method/space incompatibility."""


class BudgetExhausted(Exception):
    """Raised by the budgeted objective once n_calls evaluations are spent."""


@dataclass(frozen=True)
class EvalRecord:
    iteration: int
    design_id: str
    reward: float | None
    best_so_far: float | None
    feasible: bool
    wall_ms: float
    error: str | None = None


@dataclass(frozen=True)
class Trajectory:
    records: tuple[EvalRecord, ...]
    resolved_config: dict
    seed: int
    best_reward: float | None
    best_design: DesignPoint | None
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.records)


class BudgetedObjective:
    """Counts every environment evaluation and keeps the running best.

    Optimizers see rewards in maximization sense. Evaluations of designs
    with evaluator errors return None; the caller decides how to treat them
    (they still consume budget).
    """

    def __init__(self, env: ProblemEnvironment, budget: int):
        if budget < 1:
            raise ConfigurationError("budget must be >= 1")
        self.env = env
        self.budget = budget
        self.records: list[EvalRecord] = []
        self.warnings: list[str] = []
        self.best_reward: float | None = None
        self.best_design: DesignPoint | None = None
        self._iteration = 0
        self._measure_wall = bool(getattr(env.evaluator, "measures_wall_time", False))

    # Optimizers bump this so results rows carry their outer loop index.
    def set_iteration(self, iteration: int) -> None:
        self._iteration = iteration

    @property
    def n_evals(self) -> int:
        return len(self.records)

    @property
    def remaining(self) -> int:
        return self.budget - self.n_evals

    def evaluate_point(self, point: DesignPoint) -> float | None:
        if self.remaining <= 0:
            raise BudgetExhausted()
        start = time.perf_counter() if self._measure_wall else None
        result = self.env.evaluate(point)
        wall_ms = (time.perf_counter() - start) * 1e3 if start is not None else 0.0
        design_id = f"eval{self.n_evals:06d}"
        if result.error is None:
            if self.best_reward is None or result.reward > self.best_reward:
                self.best_reward = result.reward
                self.best_design = DesignPoint(point.values, name=design_id)
        self.records.append(
            EvalRecord(
                iteration=self._iteration,
                design_id=design_id,
                reward=result.reward,
                best_so_far=self.best_reward,
                feasible=result.feasible,
                wall_ms=wall_ms,
                error=result.error,
            )
        )
        return result.reward

    def evaluate_u(self, u: np.ndarray) -> float | None:
        point = self.env.space.denormalize(np.clip(u, 0.0, 1.0))
        return self.evaluate_point(point)

    def warn(self, message: str) -> None:
        self.warnings.append(message)


def fd_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, eps: float = FD_EPS
) -> np.ndarray:
    """Central finite differences on the unit cube, 2d function calls.

    Stencil points are clamped per coordinate so they stay inside [0, 1];
    the divisor uses the actual clamped spread.
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(len(x)):
        hi = min(x[i] + eps, 1.0)
        lo = max(x[i] - eps, 0.0)
        xp = x.copy()
        xp[i] = hi
        xm = x.copy()
        xm[i] = lo
        fp = f(xp)
        fm = f(xm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise ValueError("non-finite objective value in FD stencil")
        grad[i] = (fp - fm) / (hi - lo)
    return grad


def reward_or_neg_inf(value: float | None) -> float:
    return -np.inf if value is None else value


def uniform_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.random(dim)


def finish(
    obj: BudgetedObjective, resolved_config: dict, seed: int
) -> Trajectory:
    return Trajectory(
        records=tuple(obj.records),
        resolved_config=resolved_config,
        seed=seed,
        best_reward=obj.best_reward,
        best_design=obj.best_design,
        warnings=tuple(obj.warnings),
    )


def evaluate_warmstart(
    obj: BudgetedObjective, warmstart: Sequence[DesignPoint]
) -> list[tuple[np.ndarray, float | None]]:
    """Charge warm-start designs to the budget before the method begins."""
    out = []
    for point in warmstart:
        clipped = obj.env.space.clip(point)
        reward = obj.evaluate_point(clipped)
        out.append((obj.env.space.normalize(clipped), reward))
    return out
