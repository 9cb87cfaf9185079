"""Particle-swarm search with linearly scheduled coefficients.

Inertia decays while the social pull grows over the run: early iterations
explore, late iterations contract onto the best-known region. Personal and
global bests are committed only after the whole swarm has been evaluated at
an iteration, so update order inside a sweep does not matter.
"""
from __future__ import annotations

import numpy as np

from ..space import ParamSpace
from .base import (
    BudgetExhausted,
    BudgetedObjective,
    ConfigurationError,
    reward_or_neg_inf,
)

DEFAULTS = {
    "swarm_size": 20,
    "inertia_start": 0.8,
    "inertia_end": 0.2,
    "cognitive_start": 1.5,
    "cognitive_end": 0.5,
    "social_start": 0.2,
    "social_end": 3.0,
    "velocity_init_scale": 0.1,
}


def pso_coefficients(t: int, total: int, options: dict | None = None) -> tuple[float, float, float]:
    """(inertia, cognitive, social) at iteration t of a run with `total` steps."""
    opts = {**DEFAULTS, **(options or {})}
    if total <= 0:
        frac = 0.0
    else:
        frac = t / total
    # Convex-combination form keeps the endpoints and midpoint exact.
    w = (1.0 - frac) * opts["inertia_start"] + frac * opts["inertia_end"]
    c1 = (1.0 - frac) * opts["cognitive_start"] + frac * opts["cognitive_end"]
    c2 = (1.0 - frac) * opts["social_start"] + frac * opts["social_end"]
    return float(w), float(c1), float(c2)


def run(
    obj: BudgetedObjective,
    space: ParamSpace,
    seed: int,
    options: dict,
    warm: list[tuple[np.ndarray, float | None]],
) -> None:
    opts = {**DEFAULTS, **options}
    n = int(opts["swarm_size"])
    if n < 2:
        raise ConfigurationError("swarm_size must be >= 2")
    v_scale = float(opts["velocity_init_scale"])
    rng = space.rng(seed)
    dim = space.relaxed_dim

    pos = rng.random((n, dim))
    # Warm-start designs replace the first initial particles.
    for i, (u, _) in enumerate(warm[:n]):
        pos[i] = np.clip(u, 0.0, 1.0)
    vel = rng.uniform(-v_scale, v_scale, size=(n, dim))

    pbest = pos.copy()
    pbest_val = np.full(n, -np.inf)
    gbest = pos[0].copy()
    gbest_val = -np.inf

    # One initial sweep plus T update sweeps fit the budget exactly.
    total_iters = max(obj.remaining // n - 1, 0)

    try:
        obj.set_iteration(0)
        for i in range(n):
            val = reward_or_neg_inf(obj.evaluate_u(pos[i]))
            pbest_val[i] = val
            if val > gbest_val:
                gbest_val, gbest = val, pos[i].copy()

        for t in range(1, total_iters + 1):
            obj.set_iteration(t)
            # Sweep 1 uses the start coefficients, the final sweep the end ones.
            w, c1, c2 = pso_coefficients(t - 1, total_iters - 1, opts)
            r1 = rng.random((n, dim))
            r2 = rng.random((n, dim))
            vel = w * vel + c1 * r1 * (pbest - pos) + c2 * r2 * (gbest - pos)
            pos = np.clip(pos + vel, 0.0, 1.0)
            vals = np.empty(n)
            for i in range(n):
                vals[i] = reward_or_neg_inf(obj.evaluate_u(pos[i]))
            # Synchronous best updates after the full sweep.
            improved = vals > pbest_val
            pbest[improved] = pos[improved]
            pbest_val[improved] = vals[improved]
            k = int(np.argmax(pbest_val))
            if pbest_val[k] > gbest_val:
                gbest_val, gbest = pbest_val[k], pbest[k].copy()
        # Spend any remainder on uniform exploration rather than wasting it.
        while True:
            obj.evaluate_u(rng.random(dim))
    except BudgetExhausted:
        pass
