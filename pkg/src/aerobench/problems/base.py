"""Problem environments: operating points, constraints, and evaluation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from ..space import DesignPoint, ParamSpace

MAXIMIZE = "maximize"
MINIMIZE = "minimize"


class EvaluationError(RuntimeError):
    """An evaluator failed to produce metrics (crash, timeout, bad reply)."""


@dataclass(frozen=True)
class OperatingPoint:
    """One flight/flow condition a design is evaluated at."""

    alpha: float | None = None
    mach: float | None = None
    reynolds: float | None = None
    altitude: float | None = None
    cl_target: float | None = None
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.weight < 0:
            raise ValueError("operating-point weight must be >= 0")
        if all(
            v is None
            for v in (self.alpha, self.mach, self.reynolds, self.altitude, self.cl_target)
        ):
            raise ValueError("operating point must set at least one condition")

    def to_json(self) -> dict:
        out: dict[str, Any] = {"weight": self.weight}
        for key in ("alpha", "mach", "reynolds", "altitude", "cl_target"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "OperatingPoint":
        return cls(
            alpha=data.get("alpha"),
            mach=data.get("mach"),
            reynolds=data.get("reynolds"),
            altitude=data.get("altitude"),
            cl_target=data.get("cl_target"),
            weight=data.get("weight", 1.0),
        )


@dataclass(frozen=True)
class EvalContext:
    """Everything a constraint rule may inspect."""

    point: DesignPoint
    space: ParamSpace
    per_point: tuple[Mapping[str, float], ...]
    metrics: Mapping[str, float]
    confidence: float


@dataclass(frozen=True)
class ConstraintSpec:
    name: str
    kind: str  # inequality, equality, box
    violation: Callable[[EvalContext], float]

    def __post_init__(self) -> None:
        if self.kind not in ("inequality", "equality", "box"):
            raise ValueError(f"unknown constraint kind {self.kind!r}")


@dataclass(frozen=True)
class EvalResult:
    metrics: Mapping[str, float]
    per_point: tuple[Mapping[str, float], ...]
    violations: Mapping[str, float]
    reward: float | None
    feasible: bool
    confidence: float
    error: str | None = None


@dataclass(frozen=True)
class ProblemEnvironment:
    """One benchmark task: space + operating points + objective + constraints.

    `evaluator.point_metrics(point, op, index)` produces the per-point metric
    map; `aggregate(per_point, ops)` turns the list of metric maps into the
    raw objective (in the task's native sense) plus aggregate metrics. The
    scalarized reward is always in maximization sense: minimization tasks are
    negated after the penalty is applied.
    """

    id: str
    space: ParamSpace
    points: tuple[OperatingPoint, ...]
    constraints: tuple[ConstraintSpec, ...]
    sense: str
    penalty_weight: float
    evaluator: Any
    aggregate: Callable[
        [Sequence[Mapping[str, float]], Sequence[OperatingPoint]],
        tuple[float, dict[str, float]],
    ]
    confidence_fn: Callable[[np.ndarray], float] | None = None
    landscape_value: Callable[[np.ndarray], float] | None = None
    landscape_gradient: Callable[[np.ndarray], np.ndarray] | None = None
    diagnostics_profile: Mapping[str, Any] = field(default_factory=dict)
    objective_label: str = ""

    def __post_init__(self) -> None:
        if self.penalty_weight < 0:
            raise ValueError("penalty weight must be >= 0")
        if self.sense not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"unknown sense {self.sense!r}")
        if not self.points:
            raise ValueError("environment needs at least one operating point")

    def evaluate(self, point: DesignPoint) -> EvalResult:
        self.space.validate(point)
        try:
            per_point = tuple(
                dict(self.evaluator.point_metrics(point, op, k))
                for k, op in enumerate(self.points)
            )
        except EvaluationError as exc:
            return EvalResult(
                metrics={},
                per_point=(),
                violations={},
                reward=None,
                feasible=False,
                confidence=0.0,
                error=str(exc),
            )
        try:
            raw, agg_metrics = self.aggregate(per_point, self.points)
        except (KeyError, TypeError) as exc:
            # External evaluators may answer with an incomplete metrics map;
            # that is an evaluation failure, not a harness crash.
            return EvalResult(
                metrics={},
                per_point=per_point,
                violations={},
                reward=None,
                feasible=False,
                confidence=0.0,
                error=f"evaluator metrics unusable for {self.id}: {exc!r}",
            )
        if self.confidence_fn is not None:
            confidence = float(self.confidence_fn(self.space.normalize(point)))
        else:
            confidence = 1.0
        ctx = EvalContext(
            point=point,
            space=self.space,
            per_point=per_point,
            metrics=agg_metrics,
            confidence=confidence,
        )
        violations: dict[str, float] = {}
        for spec in self.constraints:
            v = float(spec.violation(ctx))
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{self.id}: constraint {spec.name} produced v={v}")
            violations[spec.name] = v
        total_v = sum(violations.values())
        if self.sense == MAXIMIZE:
            reward = raw - self.penalty_weight * total_v
        else:
            reward = -(raw + self.penalty_weight * total_v)
        if not np.isfinite(reward):
            raise ValueError(f"{self.id}: non-finite reward for {point.values}")
        metrics = dict(agg_metrics)
        metrics.setdefault("objective", raw)
        return EvalResult(
            metrics=metrics,
            per_point=per_point,
            violations=violations,
            reward=float(reward),
            feasible=total_v == 0.0,
            confidence=confidence,
        )

    def close(self) -> None:
        closer = getattr(self.evaluator, "close", None)
        if closer is not None:
            closer()

    def with_evaluator(self, evaluator: Any) -> "ProblemEnvironment":
        import dataclasses

        return dataclasses.replace(self, evaluator=evaluator)

    def describe(self) -> dict:
        """Catalog entry: structured metadata without the evaluator."""
        kinds = sorted({v.kind for v in self.space.variables})
        return {
            "id": self.id,
            "objective": self.objective_label,
            "sense": self.sense,
            "penalty_weight": self.penalty_weight,
            "n_operating_points": len(self.points),
            "n_constraints": len(self.constraints),
            "n_variables": len(self.space.variables),
            "relaxed_dim": self.space.relaxed_dim,
            "variable_kinds": kinds,
            "tags": list(self.diagnostics_profile.get("tags", [])),
            "space": self.space.to_json(),
            "operating_points": [op.to_json() for op in self.points],
            "constraints": [{"name": c.name, "kind": c.kind} for c in self.constraints],
        }


class _FunctionEvaluator:
    def __init__(self, space: ParamSpace, fn: Callable[[np.ndarray], float]):
        self._space = space
        self._fn = fn

    def point_metrics(self, point: DesignPoint, op: OperatingPoint, index: int) -> dict:
        u = self._space.normalize(point)
        return {"value": float(self._fn(u))}


def function_environment(
    space: ParamSpace,
    fn: Callable[[np.ndarray], float],
    sense: str = MINIMIZE,
    env_id: str = "function",
) -> ProblemEnvironment:
    """Wrap a plain function of the unit-cube vector as an environment.

    Handy for benchmarking optimizers on closed-form test functions with
    the same budget accounting as real tasks.
    """

    def aggregate(per_point, ops):
        value = per_point[0]["value"]
        return value, {"value": value}

    return ProblemEnvironment(
        id=env_id,
        space=space,
        points=(OperatingPoint(alpha=0.0),),
        constraints=(),
        sense=sense,
        penalty_weight=0.0,
        evaluator=_FunctionEvaluator(space, fn),
        aggregate=aggregate,
        objective_label="function value",
    )
