"""Box-constrained quasi-Newton search with finite-difference gradients.

Works on the relaxed unit cube. Gradients come from central finite
differences, so every line-search trial and every stencil point is charged
to the evaluation budget. The method restarts from fresh uniform points
until the budget runs out.
"""
from __future__ import annotations

import numpy as np

from ..space import CATEGORICAL, ParamSpace
from .base import (
    BudgetExhausted,
    BudgetedObjective,
    ConfigurationError,
    FD_EPS,
    fd_gradient,
)

DEFAULTS = {
    "memory": 10,
    "maxiter": 200,
    "restarts": 3,
    "gtol": 1e-6,
    "ftol": 1e-9,
    "armijo_c": 1e-4,
    "max_halvings": 20,
    "fd_eps": FD_EPS,
}


def check_space(space: ParamSpace) -> None:
    if all(v.kind == CATEGORICAL for v in space.variables):
        raise ConfigurationError(
            "gradient-based search is undefined on a purely categorical space"
        )


def _two_loop(grad: np.ndarray, s_hist: list, y_hist: list) -> np.ndarray:
    """Standard limited-memory two-loop recursion for H * grad."""
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), a in zip(zip(s_hist, y_hist), reversed(alphas)):
        rho = 1.0 / float(y @ s)
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def run(
    obj: BudgetedObjective,
    space: ParamSpace,
    seed: int,
    options: dict,
    warm: list[tuple[np.ndarray, float | None]],
) -> None:
    check_space(space)
    opts = {**DEFAULTS, **options}
    memory = int(opts["memory"])
    maxiter = int(opts["maxiter"])
    restarts = int(opts["restarts"])
    gtol = float(opts["gtol"])
    ftol = float(opts["ftol"])
    armijo_c = float(opts["armijo_c"])
    max_halvings = int(opts["max_halvings"])
    eps = float(opts["fd_eps"])
    rng = space.rng(seed)
    dim = space.relaxed_dim

    def f(u: np.ndarray) -> float:
        reward = obj.evaluate_u(u)
        # Error evaluations have no reward; treat them as a very bad value so
        # the line search backs off instead of crashing.
        return np.inf if reward is None else -reward

    # Warm starts double as extra restart points (already evaluated/charged).
    starts: list[np.ndarray] = [u for u, _ in warm]
    while len(starts) < restarts:
        starts.append(rng.random(dim))

    restart = 0
    try:
        while True:
            if restart < len(starts):
                x = np.clip(starts[restart], 0.0, 1.0)
            else:
                x = rng.random(dim)
            restart += 1
            obj.set_iteration(restart - 1)
            fx = f(x)
            if not np.isfinite(fx):
                continue
            grad = fd_gradient(f, x, eps)
            s_hist: list[np.ndarray] = []
            y_hist: list[np.ndarray] = []
            for _ in range(maxiter):
                # Projected-gradient stationarity test on the box.
                proj = x - np.clip(x - grad, 0.0, 1.0)
                if np.max(np.abs(proj)) < gtol:
                    break
                direction = -_two_loop(grad, s_hist, y_hist)
                if float(direction @ grad) >= 0.0:
                    direction = -grad
                    s_hist.clear()
                    y_hist.clear()
                # Backtracking Armijo line search on the projected step.
                step = 1.0
                x_new, f_new = None, None
                for _ in range(max_halvings):
                    cand = np.clip(x + step * direction, 0.0, 1.0)
                    f_cand = f(cand)
                    decrease = armijo_c * float(grad @ (cand - x))
                    if np.isfinite(f_cand) and f_cand <= fx + decrease:
                        x_new, f_new = cand, f_cand
                        break
                    step *= 0.5
                if x_new is None:
                    break
                grad_new = fd_gradient(f, x_new, eps)
                s = x_new - x
                y = grad_new - grad
                if float(s @ y) > 1e-12:
                    s_hist.append(s)
                    y_hist.append(y)
                    if len(s_hist) > memory:
                        s_hist.pop(0)
                        y_hist.pop(0)
                rel_drop = (fx - f_new) / max(abs(fx), abs(f_new), 1.0)
                x, fx, grad = x_new, f_new, grad_new
                if rel_drop < ftol:
                    break
    except BudgetExhausted:
        pass
