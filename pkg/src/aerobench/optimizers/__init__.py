"""Matched-budget optimizers over relaxed design spaces.

Every method consumes the same currency: one environment evaluation equals
one budget unit, including finite-difference stencils and warm-start
designs. `run_with_budget` resolves defaults, runs the method, and returns
the full evaluation trajectory plus the resolved configuration that
reproduces it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .. import __version__ as _harness_version
from ..problems.base import ProblemEnvironment
from ..problems.catalog import CATALOG_VERSION
from ..space import DesignPoint
from . import bo, cmaes, evolve, lbfgsb, pso
from .base import (
    BudgetExhausted,
    BudgetedObjective,
    ConfigurationError,
    EvalRecord,
    Trajectory,
    evaluate_warmstart,
    fd_gradient,
    finish,
)
from .pso import pso_coefficients

_METHODS = {
    "lbfgsb": lbfgsb,
    "pso": pso,
    "cmaes": cmaes,
    "bo": bo,
    "evolve": evolve,
}


def method_names() -> list[str]:
    return sorted(_METHODS)


@dataclass(frozen=True)
class OptimizerConfig:
    method: str
    budget: int
    seed: int
    options: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in _METHODS:
            raise ConfigurationError(
                f"unknown method {self.method!r}; choose from {method_names()}"
            )
        if self.budget < 1:
            raise ConfigurationError("budget must be >= 1")
        module = _METHODS[self.method]
        unknown = set(self.options) - set(module.DEFAULTS)
        if unknown:
            raise ConfigurationError(
                f"{self.method}: unknown options {sorted(unknown)}"
            )


def resolved_options(config: OptimizerConfig) -> dict:
    module = _METHODS[config.method]
    return {**module.DEFAULTS, **dict(config.options)}


def run_with_budget(
    env: ProblemEnvironment,
    config: OptimizerConfig,
    warmstart: Sequence[DesignPoint] = (),
) -> Trajectory:
    """Run one method on one task under a hard evaluation budget."""
    module = _METHODS[config.method]
    if config.method == "lbfgsb":
        lbfgsb.check_space(env.space)
    obj = BudgetedObjective(env, config.budget)
    resolved = {
        "method": config.method,
        "budget": config.budget,
        "seed": config.seed,
        "task": env.id,
        "options": resolved_options(config),
        "n_warmstart": len(warmstart),
        "catalog_version": CATALOG_VERSION,
        "harness_version": _harness_version,
    }
    try:
        warm = evaluate_warmstart(obj, warmstart)
        module.run(obj, env.space, config.seed, dict(config.options), warm)
    except BudgetExhausted:
        pass
    return finish(obj, resolved, config.seed)


__all__ = [
    "BudgetExhausted",
    "BudgetedObjective",
    "ConfigurationError",
    "EvalRecord",
    "OptimizerConfig",
    "Trajectory",
    "evaluate_warmstart",
    "fd_gradient",
    "method_names",
    "pso_coefficients",
    "resolved_options",
    "run_with_budget",
]
