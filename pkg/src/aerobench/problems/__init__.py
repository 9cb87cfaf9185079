from .base import (
    MAXIMIZE,
    MINIMIZE,
    ConstraintSpec,
    EvalContext,
    EvalResult,
    EvaluationError,
    OperatingPoint,
    ProblemEnvironment,
    function_environment,
)
from .catalog import (
    CATALOG_ENV_VAR,
    CATALOG_VERSION,
    catalog_json,
    get_environment,
    stand_in_landscape,
    task_ids,
    write_catalog,
)
from .formulas import (
    bisect_alpha_to_cl,
    car_drag_coefficient,
    integrated_drag,
    pareto_front,
    penalized_reward,
    reynolds_schedule,
    robust_min,
    weighted_multipoint,
    wiggliness,
)
from .subproc import SubprocessEvaluator

__all__ = [
    "MAXIMIZE",
    "MINIMIZE",
    "ConstraintSpec",
    "EvalContext",
    "EvalResult",
    "EvaluationError",
    "OperatingPoint",
    "ProblemEnvironment",
    "function_environment",
    "CATALOG_ENV_VAR",
    "CATALOG_VERSION",
    "catalog_json",
    "get_environment",
    "stand_in_landscape",
    "task_ids",
    "write_catalog",
    "bisect_alpha_to_cl",
    "car_drag_coefficient",
    "integrated_drag",
    "pareto_front",
    "penalized_reward",
    "reynolds_schedule",
    "robust_min",
    "weighted_multipoint",
    "wiggliness",
    "SubprocessEvaluator",
]
