"""The benchmark task library over deterministic stand-in evaluators.

Every task couples a design space with operating points, an objective
composition, and normalized constraints. Aerodynamic metrics come from the
seeded smooth landscapes in :mod:`aerobench.landscape`; geometric quantities
(airfoil thickness, wedge angles, smoothness) are computed exactly from the
design variables. Each environment also exposes an analytic (value, gradient)
pair over the normalized cube so finite-difference code can be checked
against an exact oracle.
"""
from __future__ import annotations

import dataclasses
import json
import os
from typing import Callable, Mapping, Sequence

import numpy as np

from ..landscape import MetricModel, metric_seed
from ..space import (
    CATEGORICAL,
    CONTINUOUS,
    DISCRETE,
    DesignPoint,
    ParamSpace,
    SpaceError,
    VariableSpec,
    continuous_space,
)
from . import geometry
from .base import (
    MAXIMIZE,
    MINIMIZE,
    ConstraintSpec,
    EvalContext,
    OperatingPoint,
    ProblemEnvironment,
)
from .formulas import (
    bisect_alpha_to_cl,
    car_drag_coefficient,
    fractional_violation,
    integrated_drag,
    reynolds_schedule,
    robust_min,
    weighted_multipoint,
    wiggliness,
)

CATALOG_VERSION = "1"
CATALOG_ENV_VAR = "AEROBENCH_CATALOG"

AIRFOIL_PENALTY = 500.0


def confidence_proxy(u: np.ndarray) -> float:
    """In-distribution proxy: 1 at the cube center, 0.85 at every corner."""
    return 1.0 - 0.15 * float(np.mean((2.0 * u - 1.0) ** 2))


class StandInEvaluator:
    """Deterministic per-point metric source over the normalized cube."""

    def __init__(
        self,
        space: ParamSpace,
        fn: Callable[[np.ndarray, DesignPoint, OperatingPoint, int], dict],
    ):
        self._space = space
        self._fn = fn

    def point_metrics(self, point: DesignPoint, op: OperatingPoint, index: int) -> dict:
        u = self._space.normalize(point)
        return self._fn(u, point, op, index)


def _model(task_id: str, name: str, dim: int, lo: float, hi: float, alpha_slope: float = 0.0) -> MetricModel:
    return MetricModel.seeded(metric_seed(task_id, name), dim, lo, hi, alpha_slope)


def _ratio_landscape(cl: MetricModel, cd: MetricModel):
    def value(u: np.ndarray) -> float:
        return cl.value(u) / cd.value(u)

    def gradient(u: np.ndarray) -> np.ndarray:
        cdv = cd.value(u)
        return (cl.gradient(u) * cdv - cl.value(u) * cd.gradient(u)) / cdv**2

    return value, gradient


# ---------------------------------------------------------------------------
# 2D airfoil tasks
# ---------------------------------------------------------------------------

def _airfoil_space() -> ParamSpace:
    bounds: dict[str, tuple[float, float]] = {}
    for k in geometry.UPPER_KEYS:
        bounds[k] = (-0.30, 0.60)
    for k in geometry.LOWER_KEYS:
        bounds[k] = (-0.30, 0.30)
    bounds["p_le"] = (-0.50, 0.50)
    bounds["t_te"] = (0.0, 0.010)
    return continuous_space(bounds)


_THICKNESS_GRID = tuple(0.05 * i for i in range(1, 20))


def _airfoil_geometry_metrics(point: DesignPoint) -> dict:
    upper, lower = geometry.surface_weights(point.values)
    t_te = float(point["t_te"])
    t_min = min(geometry.thickness(upper, lower, t_te, x) for x in _THICKNESS_GRID)
    return {
        "t_033": geometry.thickness(upper, lower, t_te, 0.33),
        "t_090": geometry.thickness(upper, lower, t_te, 0.90),
        "t_min": t_min,
        "theta_te": geometry.trailing_wedge_angle_deg(upper, lower, t_te),
        "theta_le": geometry.leading_edge_angle_deg(upper, lower),
        "wiggliness": wiggliness([upper, lower]),
    }


def _airfoil_geometry_constraints() -> list[ConstraintSpec]:
    w_cap = 2.0 * geometry.reference_wiggliness()
    return [
        ConstraintSpec(
            "thickness_positive",
            "inequality",
            lambda c: fractional_violation(-c.metrics["t_min"], 0.05),
        ),
        ConstraintSpec(
            "thickness_033",
            "inequality",
            lambda c: fractional_violation(0.128 - c.metrics["t_033"], 0.128),
        ),
        ConstraintSpec(
            "thickness_090",
            "inequality",
            lambda c: fractional_violation(0.014 - c.metrics["t_090"], 0.014),
        ),
        ConstraintSpec(
            "wedge_angle",
            "inequality",
            lambda c: fractional_violation(6.03 - c.metrics["theta_te"], 6.03),
        ),
        ConstraintSpec(
            "nose_angle",
            "equality",
            lambda c: min(1.0, abs(c.metrics["theta_le"] - 180.0) / 1.0),
        ),
        ConstraintSpec(
            "smoothness",
            "inequality",
            lambda c, cap=w_cap: fractional_violation(c.metrics["wiggliness"] - cap, cap),
        ),
    ]


def _confidence_constraint() -> ConstraintSpec:
    return ConstraintSpec(
        "analysis_confidence",
        "inequality",
        lambda c: fractional_violation(0.90 - c.confidence, 0.05),
    )


def _build_airfoil_single() -> ProblemEnvironment:
    tid = "airfoil-ld-single"
    space = _airfoil_space()
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, 0.2, 1.8)
    cd = _model(tid, "CD", dim, 0.006, 0.05)
    cm = _model(tid, "CM", dim, -0.2, 0.05)

    def fn(u, point, op, k):
        out = {"CL": cl.value(u), "CD": cd.value(u), "CM": cm.value(u)}
        out.update(_airfoil_geometry_metrics(point))
        return out

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        m["LD"] = m["CL"] / m["CD"]
        return m["LD"], m

    constraints = _airfoil_geometry_constraints()
    constraints.append(
        ConstraintSpec(
            "pitching_moment",
            "inequality",
            lambda c: fractional_violation(-0.133 - c.metrics["CM"], 0.067),
        )
    )
    constraints.append(_confidence_constraint())
    value, grad = _ratio_landscape(cl, cd)
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(OperatingPoint(alpha=5.0, mach=0.2, reynolds=1e7),),
        constraints=tuple(constraints),
        sense=MAXIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "required_metrics": ["CL", "CD", "CM"],
            "compat_token": "airfoil-18w",
        },
        objective_label="maximize CL/CD",
    )


_POLAR_CL_TARGETS = (0.8, 1.0, 1.2, 1.4, 1.5, 1.6)
_POLAR_WEIGHTS = (5.0, 6.0, 7.0, 8.0, 9.0, 10.0)


def _build_airfoil_multipoint() -> ProblemEnvironment:
    tid = "airfoil-drag-multipoint"
    space = _airfoil_space()
    dim = space.relaxed_dim
    cd_models = [_model(tid, f"CD@{k}", dim, 0.008, 0.04) for k in range(6)]
    cm_models = [_model(tid, f"CM@{k}", dim, -0.2, 0.05) for k in range(6)]
    cl_max = _model(tid, "CLmax", dim, 0.9, 2.0)

    def fn(u, point, op, k):
        out = {
            "CD": cd_models[k].value(u),
            "CM": cm_models[k].value(u),
            "CL_max": cl_max.value(u),
        }
        if k == 0:
            out.update(_airfoil_geometry_metrics(point))
        return out

    def aggregate(per_point, ops):
        raw = weighted_multipoint(
            [pp["CD"] for pp in per_point], [op.weight for op in ops]
        )
        m = {key: per_point[0][key] for key in per_point[0] if key not in ("CD", "CM")}
        m["CD_weighted"] = raw
        return raw, m

    constraints = _airfoil_geometry_constraints()
    for k, target in enumerate(_POLAR_CL_TARGETS):
        constraints.append(
            ConstraintSpec(
                f"pitching_moment_p{k}",
                "inequality",
                lambda c, k=k: fractional_violation(
                    -0.133 - c.per_point[k]["CM"], 0.067
                ),
            )
        )
        constraints.append(
            ConstraintSpec(
                f"cl_reachable_p{k}",
                "inequality",
                lambda c, k=k, t=target: fractional_violation(
                    t - c.per_point[k]["CL_max"], 0.5
                ),
            )
        )
    # The stand-in lift response is additive in alpha with positive slope,
    # so monotonicity holds by construction; the constraint is kept so the
    # task signature matches external evaluators that must earn it.
    constraints.append(ConstraintSpec("alpha_monotonic", "inequality", lambda c: 0.0))
    constraints.append(_confidence_constraint())

    weights = np.array(_POLAR_WEIGHTS) / sum(_POLAR_WEIGHTS)

    def value(u: np.ndarray) -> float:
        return float(sum(w * m.value(u) for w, m in zip(weights, cd_models)))

    def grad(u: np.ndarray) -> np.ndarray:
        return sum(w * m.gradient(u) for w, m in zip(weights, cd_models))

    points = tuple(
        OperatingPoint(
            cl_target=t, reynolds=reynolds_schedule(t), mach=0.03, weight=w
        )
        for t, w in zip(_POLAR_CL_TARGETS, _POLAR_WEIGHTS)
    )
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=points,
        constraints=tuple(constraints),
        sense=MINIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "required_metrics": ["CD_weighted"],
            "compat_token": "airfoil-18w",
        },
        objective_label="minimize weighted mean CD at six lift targets",
    )


# ---------------------------------------------------------------------------
# Delta wing tasks
# ---------------------------------------------------------------------------

_ROOT_AIRFOILS = ("NACA0010", "NACA0016", "NACA0024", "NACA2416", "NACA4416")


def _delta_space(sweep_kind: str) -> ParamSpace:
    if sweep_kind == CONTINUOUS:
        sweep = VariableSpec("sweep_angle", CONTINUOUS, 55.0, 75.0, unit="deg")
    else:
        sweep = VariableSpec("sweep_angle", DISCRETE, levels=(55.0, 65.0, 75.0), unit="deg")
    return ParamSpace(
        (sweep, VariableSpec("root_airfoil", CATEGORICAL, levels=_ROOT_AIRFOILS))
    )


def _build_delta_single() -> ProblemEnvironment:
    tid = "delta-ld-single"
    space = _delta_space(CONTINUOUS)
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, 0.3, 1.2)
    cd = _model(tid, "CD", dim, 0.01, 0.08)

    def fn(u, point, op, k):
        return {"CL": cl.value(u), "CD": cd.value(u)}

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        m["LD"] = m["CL"] / m["CD"]
        return m["LD"], m

    value, grad = _ratio_landscape(cl, cd)
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(OperatingPoint(alpha=10.0, mach=0.42, reynolds=8.2e6),),
        constraints=(),
        sense=MAXIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": ["sweep_angle"],
            "required_metrics": ["CL", "CD"],
            "compat_token": "delta-wing",
        },
        objective_label="maximize CL/CD",
    )


def _build_delta_robust() -> ProblemEnvironment:
    tid = "delta-ld-robust"
    space = _delta_space(DISCRETE)
    dim = space.relaxed_dim
    cl_models = [_model(tid, f"CL@{k}", dim, 0.3, 1.2) for k in range(3)]
    cd_models = [_model(tid, f"CD@{k}", dim, 0.01, 0.08) for k in range(3)]

    def fn(u, point, op, k):
        return {"CL": cl_models[k].value(u), "CD": cd_models[k].value(u)}

    def aggregate(per_point, ops):
        lds = [pp["CL"] / pp["CD"] for pp in per_point]
        raw = robust_min(lds)
        return raw, {"LD_worst": raw}

    pairs = [_ratio_landscape(cl, cd) for cl, cd in zip(cl_models, cd_models)]

    def value(u: np.ndarray) -> float:
        return min(v(u) for v, _ in pairs)

    def grad(u: np.ndarray) -> np.ndarray:
        k = int(np.argmin([v(u) for v, _ in pairs]))
        return pairs[k][1](u)

    points = (
        OperatingPoint(alpha=4.0, mach=0.35, reynolds=7.0e6),
        OperatingPoint(alpha=10.0, mach=0.42, reynolds=8.5e6),
        OperatingPoint(alpha=16.0, mach=0.50, reynolds=9.5e6),
    )
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=points,
        constraints=(),
        sense=MAXIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": ["sweep_angle"],
            "required_metrics": ["LD_worst"],
            "compat_token": "delta-wing",
        },
        objective_label="maximize worst-case CL/CD over three operating points",
    )


_TRIM_WEIGHT = 10.0


def _build_delta_multiobjective() -> ProblemEnvironment:
    tid = "delta-mo-trim"
    space = _delta_space(CONTINUOUS)
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, 0.3, 1.2)
    cd = _model(tid, "CD", dim, 0.01, 0.08)
    cm = _model(tid, "CM", dim, -0.15, 0.15)

    def fn(u, point, op, k):
        return {"CL": cl.value(u), "CD": cd.value(u), "CM": cm.value(u)}

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        m["LD"] = m["CL"] / m["CD"]
        m["abs_CM"] = abs(m["CM"])
        raw = m["LD"] - _TRIM_WEIGHT * m["abs_CM"]
        return raw, m

    ld_value, ld_grad = _ratio_landscape(cl, cd)

    def value(u: np.ndarray) -> float:
        return ld_value(u) - _TRIM_WEIGHT * abs(cm.value(u))

    def grad(u: np.ndarray) -> np.ndarray:
        return ld_grad(u) - _TRIM_WEIGHT * np.sign(cm.value(u)) * cm.gradient(u)

    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(OperatingPoint(alpha=10.0, mach=0.42, reynolds=8.9e6),),
        constraints=(),
        sense=MAXIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": ["sweep_angle"],
            "required_metrics": ["LD", "abs_CM"],
            "compat_token": "delta-wing",
            "pareto_axes": [["LD", "maximize"], ["abs_CM", "minimize"]],
        },
        objective_label="maximize CL/CD minus weighted trim penalty (Pareto axes recorded)",
    )


# ---------------------------------------------------------------------------
# Blended wing body
# ---------------------------------------------------------------------------

_BWB_CL_TARGETS = (0.185, 0.206, 0.206, 0.206, 0.227)
_BWB_CELL_AREAS = (0.30, 0.30, 0.20, 0.20)
_BWB_CELL_NX = (0.05, -0.03, 0.08, -0.06)
_BWB_CP_SCALE = (1.0, 0.8, 1.2, 0.9)
_BWB_CFX_SCALE = (1.0, 1.1, 0.9, 1.05)
_BWB_S_REF = 0.8
BWB_ALPHA_RANGE = (-5.0, 12.0)
BISECTION_ITERS = 8


def _build_bwb_multipoint() -> ProblemEnvironment:
    tid = "bwb-drag-multipoint"
    space = continuous_space(
        {
            "chord_ratio_2": (0.55, 0.85),
            "chord_ratio_3": (0.18, 0.28),
            "chord_ratio_4": (0.06, 0.09),
            "span_ratio_1": (0.10, 0.20),
            "span_ratio_2": (0.05, 0.20),
            "span_ratio_3": (0.20, 0.70),
            "sweep_inner": (40.0, 60.0),
            "sweep_mid": (40.0, 60.0),
            "sweep_outer": (24.0, 40.0),
        },
        units={"sweep_inner": "deg", "sweep_mid": "deg", "sweep_outer": "deg"},
    )
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, -0.05, 0.35, alpha_slope=0.04)
    cp = _model(tid, "Cp", dim, -0.6, 0.2, alpha_slope=0.01)
    cfx = _model(tid, "Cfx", dim, 0.002, 0.006, alpha_slope=1e-4)
    # integrated drag is linear in the two fields given the fixed cell layout
    a_coef = sum(
        s * a * nx for s, a, nx in zip(_BWB_CP_SCALE, _BWB_CELL_AREAS, _BWB_CELL_NX)
    ) / _BWB_S_REF
    b_coef = sum(s * a for s, a in zip(_BWB_CFX_SCALE, _BWB_CELL_AREAS)) / _BWB_S_REF

    def fn(u, point, op, k):
        lo, hi = BWB_ALPHA_RANGE
        alpha, bracketed = bisect_alpha_to_cl(
            lambda a: cl.value(u, a), op.cl_target, lo, hi, BISECTION_ITERS
        )
        cpv = cp.value(u, alpha)
        cfxv = cfx.value(u, alpha)
        cells = [
            (cpv * cs, cfxv * fs, a, nx)
            for cs, fs, a, nx in zip(
                _BWB_CP_SCALE, _BWB_CFX_SCALE, _BWB_CELL_AREAS, _BWB_CELL_NX
            )
        ]
        return {
            "alpha_star": alpha,
            "bracketed": float(bracketed),
            "CL": cl.value(u, alpha),
            "Cp_mean": cpv,
            "Cfx_mean": cfxv,
            "CD_int": integrated_drag(cells, _BWB_S_REF),
        }

    def aggregate(per_point, ops):
        raw = float(np.mean([pp["CD_int"] for pp in per_point]))
        return raw, {"CD_int_mean": raw}

    constraints = tuple(
        ConstraintSpec(
            f"cl_reachable_p{k}",
            "inequality",
            lambda c, k=k, t=t: (1.0 - c.per_point[k]["bracketed"])
            * fractional_violation(abs(c.per_point[k]["CL"] - t), 0.1),
        )
        for k, t in enumerate(_BWB_CL_TARGETS)
    )

    def alpha_star(u: np.ndarray, target: float) -> float:
        return (target - cl.value(u, 0.0)) / cl.alpha_slope

    def value(u: np.ndarray) -> float:
        total = 0.0
        for t in _BWB_CL_TARGETS:
            a = alpha_star(u, t)
            total += a_coef * cp.value(u, a) + b_coef * cfx.value(u, a)
        return total / len(_BWB_CL_TARGETS)

    def grad(u: np.ndarray) -> np.ndarray:
        d_alpha = -cl.gradient(u) / cl.alpha_slope
        total = np.zeros_like(u)
        for _t in _BWB_CL_TARGETS:
            total += a_coef * (cp.gradient(u) + cp.alpha_slope * d_alpha)
            total += b_coef * (cfx.gradient(u) + cfx.alpha_slope * d_alpha)
        return total / len(_BWB_CL_TARGETS)

    points = tuple(
        OperatingPoint(cl_target=t, mach=0.3, reynolds=1e7) for t in _BWB_CL_TARGETS
    )
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=points,
        constraints=constraints,
        sense=MINIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": ["sweep_inner", "sweep_mid", "sweep_outer"],
            "required_metrics": ["CD_int_mean"],
            "compat_token": "bwb-9p",
        },
        objective_label="minimize mean integrated drag at five trimmed lift targets",
    )


# ---------------------------------------------------------------------------
# Transonic swept wing
# ---------------------------------------------------------------------------

def _transonic_space() -> ParamSpace:
    bounds: dict[str, tuple[float, float]] = {
        "sweep_angle": (25.0, 40.0),
        "aspect_ratio": (8.0, 11.0),
        "taper_ratio": (0.15, 0.40),
        "kink_position": (0.36, 0.42),
        "kink_chord_scale": (0.10, 1.10),
        "dihedral_kink": (0.5, 6.0),
        "dihedral_tip": (4.0, 6.0),
        "root_thickness": (0.14, 0.17),
        "thickness_ratio_2": (0.60, 0.70),
        "thickness_ratio_3": (0.90, 0.98),
        "thickness_ratio_4": (0.92, 1.00),
        "depth_ratio_1": (0.30, 0.80),
        "depth_ratio_2": (0.50, 1.00),
        "depth_ratio_4": (0.00, 0.80),
        "twist_1": (-4.0, -2.0),
        "twist_2": (-4.0, -2.0),
        "twist_3": (-3.0, -1.0),
        "twist_4": (-3.0, -1.0),
    }
    for i in range(10):
        bounds[f"cu{i}"] = (-0.3, 0.6)
    for i in range(10):
        bounds[f"cl{i}"] = (-0.3, 0.3)
    units = {k: "deg" for k in ("sweep_angle", "dihedral_kink", "dihedral_tip",
                                "twist_1", "twist_2", "twist_3", "twist_4")}
    return continuous_space(bounds, units)


TRANSONIC_CL_FLOOR = 0.45
TRANSONIC_CL_PENALTY = 10.0


def _build_transonic_single() -> ProblemEnvironment:
    tid = "transonic-drag-single"
    space = _transonic_space()
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, 0.25, 1.05, alpha_slope=0.05)
    cd = _model(tid, "CD", dim, 0.015, 0.08)

    def fn(u, point, op, k):
        return {"CL": cl.value(u, op.alpha), "CD": cd.value(u, op.alpha)}

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        shortfall = max(0.0, TRANSONIC_CL_FLOOR - m["CL"])
        m["lift_shortfall"] = shortfall
        raw = m["CD"] + TRANSONIC_CL_PENALTY * shortfall**2
        return raw, m

    op = OperatingPoint(alpha=3.0, mach=0.82)

    def value(u: np.ndarray) -> float:
        shortfall = max(0.0, TRANSONIC_CL_FLOOR - cl.value(u, op.alpha))
        return cd.value(u, op.alpha) + TRANSONIC_CL_PENALTY * shortfall**2

    def grad(u: np.ndarray) -> np.ndarray:
        shortfall = max(0.0, TRANSONIC_CL_FLOOR - cl.value(u, op.alpha))
        return cd.gradient(u) - 2.0 * TRANSONIC_CL_PENALTY * shortfall * cl.gradient(u)

    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(op,),
        constraints=(),
        sense=MINIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": [
                "sweep_angle", "dihedral_kink", "dihedral_tip",
                "twist_1", "twist_2", "twist_3", "twist_4",
            ],
            "required_metrics": ["CL", "CD"],
            "compat_token": "swept-wing-38p",
        },
        objective_label="minimize CD with quadratic lift-floor penalty",
    )


_RANGE_CL_TARGETS = (0.30, 0.40, 0.50, 0.60)
RANGE_MACH = 0.80
RANGE_ALPHA_RANGE = (2.0, 12.0)


def _build_transonic_range() -> ProblemEnvironment:
    tid = "transonic-range-multipoint"
    space = _transonic_space()
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, 0.02, 0.18, alpha_slope=0.05)
    cd = _model(tid, "CD", dim, 0.02, 0.09, alpha_slope=0.003)

    def term(clv: float, cdv: float, target: float) -> float:
        return -RANGE_MACH * clv / cdv + (RANGE_MACH**2 * clv - RANGE_MACH * target) ** 2

    def fn(u, point, op, k):
        lo, hi = RANGE_ALPHA_RANGE
        alpha, bracketed = bisect_alpha_to_cl(
            lambda a: cl.value(u, a), op.cl_target, lo, hi, BISECTION_ITERS
        )
        clv = cl.value(u, alpha)
        cdv = cd.value(u, alpha)
        return {
            "alpha_star": alpha,
            "bracketed": float(bracketed),
            "CL": clv,
            "CD": cdv,
            "range_term": term(clv, cdv, op.cl_target),
        }

    def aggregate(per_point, ops):
        raw = weighted_multipoint(
            [pp["range_term"] for pp in per_point], [op.weight for op in ops]
        )
        return raw, {"range_objective": raw}

    constraints = tuple(
        ConstraintSpec(
            f"cl_reachable_p{k}",
            "inequality",
            lambda c, k=k, t=t: (1.0 - c.per_point[k]["bracketed"])
            * fractional_violation(abs(c.per_point[k]["CL"] - t), 0.1),
        )
        for k, t in enumerate(_RANGE_CL_TARGETS)
    )

    weights = np.array(_RANGE_CL_TARGETS) / sum(_RANGE_CL_TARGETS)

    def value(u: np.ndarray) -> float:
        total = 0.0
        for w, t in zip(weights, _RANGE_CL_TARGETS):
            a = (t - cl.value(u, 0.0)) / cl.alpha_slope
            total += w * term(cl.value(u, a), cd.value(u, a), t)
        return float(total)

    def grad(u: np.ndarray) -> np.ndarray:
        d_alpha = -cl.gradient(u) / cl.alpha_slope
        total = np.zeros_like(u)
        for w, t in zip(weights, _RANGE_CL_TARGETS):
            a = (t - cl.value(u, 0.0)) / cl.alpha_slope
            clv = cl.value(u, a)
            cdv = cd.value(u, a)
            g_cl = cl.gradient(u) + cl.alpha_slope * d_alpha  # zero by construction
            g_cd = cd.gradient(u) + cd.alpha_slope * d_alpha
            d_ld = -RANGE_MACH * (g_cl * cdv - clv * g_cd) / cdv**2
            d_pen = (
                2.0
                * (RANGE_MACH**2 * clv - RANGE_MACH * t)
                * RANGE_MACH**2
                * g_cl
            )
            total += w * (d_ld + d_pen)
        return total

    points = tuple(
        OperatingPoint(cl_target=t, mach=RANGE_MACH, weight=t) for t in _RANGE_CL_TARGETS
    )
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=points,
        constraints=constraints,
        sense=MINIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": [
                "sweep_angle", "dihedral_kink", "dihedral_tip",
                "twist_1", "twist_2", "twist_3", "twist_4",
            ],
            "required_metrics": ["range_objective"],
            "compat_token": "swept-wing-38p",
        },
        objective_label="minimize lift-weighted range objective at four trimmed lift targets",
    )


# ---------------------------------------------------------------------------
# CCA drone
# ---------------------------------------------------------------------------

def _build_cca() -> ProblemEnvironment:
    tid = "cca-ld-single"
    variables = [
        VariableSpec("dihedral_angle", CONTINUOUS, 0.25, 15.0, unit="deg"),
        VariableSpec("max_wing_blend", CONTINUOUS, 25.0, 1000.0, unit="mm"),
        VariableSpec("inlet_angle_1", CONTINUOUS, 0.0, 45.0, unit="deg"),
        VariableSpec("inlet_angle_2", CONTINUOUS, 0.0, 10.0, unit="deg"),
        VariableSpec("wing_position", CONTINUOUS, 0.22, 0.51),
        VariableSpec("rear_point_x", CONTINUOUS, 4500.0, 7500.0, unit="mm"),
        VariableSpec("inlet_location", CONTINUOUS, 0.2, 0.6),
        VariableSpec("naca_airfoil", CATEGORICAL, levels=("1412", "0012", "2408", "4412")),
        VariableSpec("fore_top_angle", CONTINUOUS, 0.0, 10.0, unit="deg"),
        VariableSpec("aft_top_angle", CONTINUOUS, 12.0, 32.5, unit="deg"),
        VariableSpec("top_height_aft", CONTINUOUS, 36.0, 220.0, unit="mm"),
        VariableSpec("bottom_height_aft", CONTINUOUS, 38.0, 208.0, unit="mm"),
        VariableSpec("wing_span", CONTINUOUS, 6500.0, 20000.0, unit="mm"),
        VariableSpec("rear_tail_offset", CONTINUOUS, 992.0, 1770.0, unit="mm"),
        VariableSpec("root_chord", CONTINUOUS, 1431.0, 2700.0, unit="mm"),
        VariableSpec("tail_root_chord", CONTINUOUS, 800.0, 1200.0, unit="mm"),
    ]
    space = ParamSpace(tuple(variables))
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, 0.2, 1.2)
    cd = _model(tid, "CD", dim, 0.02, 0.12)

    def fn(u, point, op, k):
        return {"CL": cl.value(u), "CD": cd.value(u)}

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        m["LD"] = m["CL"] / m["CD"]
        return m["LD"], m

    value, grad = _ratio_landscape(cl, cd)
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(OperatingPoint(alpha=3.0, mach=0.4, reynolds=8e6),),
        constraints=(),
        sense=MAXIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": [
                "dihedral_angle", "inlet_angle_1", "inlet_angle_2",
                "fore_top_angle", "aft_top_angle",
            ],
            "required_metrics": ["CL", "CD"],
            "compat_token": "cca-16p",
        },
        objective_label="maximize CL/CD",
    )


# ---------------------------------------------------------------------------
# 3D car
# ---------------------------------------------------------------------------

CAR_PARAM_BOUNDS: dict[str, tuple[float, float]] = {
    "car_size": (0.8, 1.2),
    "car_width": (-0.1, 0.1),
    "car_len": (-0.1, 0.1),
    "ramp_angle": (-8.0, 8.0),
    "front_bumper_length": (-0.1, 0.1),
    "wind_screen_x": (-0.05, 0.05),
    "wind_screen_z": (-0.05, 0.05),
    "side_mirrors_x": (-0.05, 0.05),
    "side_mirrors_z": (-0.05, 0.05),
    "rear_window_x": (-0.05, 0.05),
    "rear_window_z": (-0.05, 0.05),
    "trunklid_angle": (-8.0, 8.0),
    "trunklid_x": (-0.05, 0.05),
    "trunklid_z": (-0.05, 0.05),
    "diffusor_angle": (-8.0, 8.0),
    "car_green_house_angle": (-8.0, 8.0),
    "car_front_hood_angle": (-8.0, 8.0),
    "car_air_intake_angle": (-8.0, 8.0),
    "tires_diameter": (-0.013, 0.013),
    "tires_width": (-0.015, 0.015),
}

CAR_ANGLE_PARAMS = (
    "ramp_angle",
    "trunklid_angle",
    "diffusor_angle",
    "car_green_house_angle",
    "car_front_hood_angle",
    "car_air_intake_angle",
)


def _build_car() -> ProblemEnvironment:
    tid = "car-drag-single"
    units = {k: "deg" for k in CAR_ANGLE_PARAMS}
    units.update({k: "m" for k in CAR_PARAM_BOUNDS if k.endswith(("_x", "_z"))})
    space = continuous_space(CAR_PARAM_BOUNDS, units)
    dim = space.relaxed_dim
    fp = _model(tid, "drag_pressure", dim, 60.0, 220.0)
    fs = _model(tid, "drag_shear", dim, 15.0, 70.0)
    lift = _model(tid, "lift", dim, -400.0, 250.0)

    def fn(u, point, op, k):
        fpv = fp.value(u)
        fsv = fs.value(u)
        return {
            "drag_pressure": fpv,
            "drag_shear": fsv,
            "drag": fpv + fsv,
            "Cd": car_drag_coefficient(fpv, fsv),
            "lift": lift.value(u),
        }

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        return m["Cd"], m

    from .formulas import CAR_A_REF_M2, CAR_Q_INF_PA

    denom = CAR_Q_INF_PA * CAR_A_REF_M2

    def value(u: np.ndarray) -> float:
        return (fp.value(u) + fs.value(u)) / denom

    def grad(u: np.ndarray) -> np.ndarray:
        return (fp.gradient(u) + fs.gradient(u)) / denom

    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(OperatingPoint(mach=0.117),),
        constraints=(),
        sense=MINIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": list(CAR_ANGLE_PARAMS),
            "scale_param": "car_size",
            "width_param": "car_width",
            "length_param": "car_len",
            "required_metrics": ["drag", "Cd", "lift", "drag_pressure", "drag_shear"],
            "compat_token": "vtk_E",
        },
        objective_label="minimize Cd",
    )


# ---------------------------------------------------------------------------
# Mixed-variable aircraft
# ---------------------------------------------------------------------------

CERAS_PENALTY = 20000.0


def _build_ceras() -> ProblemEnvironment:
    tid = "ceras-fuel-mixed"
    variables = (
        VariableSpec("x_mac", CONTINUOUS, 16.0, 18.0, unit="m"),
        VariableSpec("ar_wing", CONTINUOUS, 5.0, 11.0),
        VariableSpec("ar_vtail", CONTINUOUS, 1.5, 6.0),
        VariableSpec("ar_htail", CONTINUOUS, 1.5, 6.0),
        VariableSpec("taper_wing", CONTINUOUS, 0.0, 1.0),
        VariableSpec("sweep_wing", CONTINUOUS, 20.0, 30.0, unit="deg"),
        VariableSpec("cruise_altitude", DISCRETE, levels=(30000, 32000, 34000, 36000), unit="ft"),
        VariableSpec("engine_count", DISCRETE, levels=(2, 3, 4)),
        VariableSpec("tail_geometry", CATEGORICAL, levels=("T-tail", "no T-tail")),
        VariableSpec("engine_position", CATEGORICAL, levels=("front engines", "rear engines")),
    )
    space = ParamSpace(variables)
    dim = space.relaxed_dim  # 12 after one-hot relaxation
    fuel = _model(tid, "FuelMass", dim, 17000.0, 23000.0)
    sm = _model(tid, "StaticMargin", dim, 0.0, 0.15)

    def fn(u, point, op, k):
        return {"FuelMass": fuel.value(u), "StaticMargin": sm.value(u)}

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        return m["FuelMass"], m

    constraints = (
        ConstraintSpec(
            "static_margin_low",
            "inequality",
            lambda c: fractional_violation(0.05 - c.metrics["StaticMargin"], 0.05),
        ),
        ConstraintSpec(
            "static_margin_high",
            "inequality",
            lambda c: fractional_violation(c.metrics["StaticMargin"] - 0.1, 0.05),
        ),
    )
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(OperatingPoint(mach=0.78),),
        constraints=constraints,
        sense=MINIMIZE,
        penalty_weight=CERAS_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=fuel.value,
        landscape_gradient=fuel.gradient,
        diagnostics_profile={
            "angle_params": ["sweep_wing"],
            "required_metrics": ["FuelMass", "StaticMargin"],
            "compat_token": "ceras-a320",
            "tags": ["mixed"],
        },
        objective_label="minimize FuelMass subject to static-margin window",
    )


def _build_sta() -> ProblemEnvironment:
    tid = "sta-ld-mixed"
    variables = (
        VariableSpec("sweep_inboard", CONTINUOUS, 10.0, 50.0, unit="deg"),
        VariableSpec("sweep_outboard", CONTINUOUS, 10.0, 70.0, unit="deg"),
        VariableSpec("canard_position", CONTINUOUS, 0.1, 0.4),
        VariableSpec("wing_position", CONTINUOUS, 0.4, 0.7),
        VariableSpec("break_chord_ratio", CONTINUOUS, 0.1, 0.9),
        VariableSpec("break_span_ratio", CONTINUOUS, 0.1, 0.7),
        VariableSpec("cranked_wing", CATEGORICAL, levels=("cranked", "not cranked")),
        VariableSpec("tail_geometry", CATEGORICAL, levels=("T-tail", "no T-tail")),
        VariableSpec("canard", CATEGORICAL, levels=("canard", "no canard")),
    )
    space = ParamSpace(variables)
    dim = space.relaxed_dim
    cl = _model(tid, "CL", dim, 0.08, 0.4)
    cd = _model(tid, "CD", dim, 0.008, 0.05)

    def fn(u, point, op, k):
        return {"CL": cl.value(u), "CD": cd.value(u)}

    def aggregate(per_point, ops):
        m = dict(per_point[0])
        m["LD"] = m["CL"] / m["CD"]
        return m["LD"], m

    value, grad = _ratio_landscape(cl, cd)
    return ProblemEnvironment(
        id=tid,
        space=space,
        points=(OperatingPoint(mach=1.5, altitude=50000.0),),
        constraints=(),
        sense=MAXIMIZE,
        penalty_weight=AIRFOIL_PENALTY,
        evaluator=StandInEvaluator(space, fn),
        aggregate=aggregate,
        confidence_fn=confidence_proxy,
        landscape_value=value,
        landscape_gradient=grad,
        diagnostics_profile={
            "angle_params": ["sweep_inboard", "sweep_outboard"],
            "required_metrics": ["CL", "CD"],
            "compat_token": "sta-cruise",
            "tags": ["mixed"],
        },
        objective_label="maximize cruise CL/CD",
    )


# ---------------------------------------------------------------------------
# Registry and catalog I/O
# ---------------------------------------------------------------------------

_BUILDERS: dict[str, Callable[[], ProblemEnvironment]] = {
    "airfoil-ld-single": _build_airfoil_single,
    "airfoil-drag-multipoint": _build_airfoil_multipoint,
    "delta-ld-single": _build_delta_single,
    "delta-ld-robust": _build_delta_robust,
    "delta-mo-trim": _build_delta_multiobjective,
    "bwb-drag-multipoint": _build_bwb_multipoint,
    "transonic-drag-single": _build_transonic_single,
    "transonic-range-multipoint": _build_transonic_range,
    "cca-ld-single": _build_cca,
    "car-drag-single": _build_car,
    "ceras-fuel-mixed": _build_ceras,
    "sta-ld-mixed": _build_sta,
}


def task_ids() -> list[str]:
    return list(_BUILDERS)


def _apply_space_override(env: ProblemEnvironment, path: str) -> ProblemEnvironment:
    with open(path) as fh:
        data = json.load(fh)
    tasks = data.get("tasks", [])
    # Accept both the catalog export shape (list of entries with "id")
    # and a terser mapping of task id -> entry.
    if isinstance(tasks, dict):
        entries = tasks
    else:
        entries = {t["id"]: t for t in tasks}
    if env.id not in entries:
        return env
    space = ParamSpace.from_json(entries[env.id]["space"])
    if space.names != env.space.names or any(
        a.kind != b.kind for a, b in zip(space.variables, env.space.variables)
    ):
        raise SpaceError(
            f"catalog override for {env.id} must keep variable names and kinds"
        )
    return dataclasses.replace(env, space=space)


def get_environment(
    task_id: str,
    evaluator_command: Sequence[str] | None = None,
    timeout: float | None = None,
) -> ProblemEnvironment:
    if task_id not in _BUILDERS:
        raise KeyError(f"unknown task {task_id!r}; known: {', '.join(_BUILDERS)}")
    env = _BUILDERS[task_id]()
    override = os.environ.get(CATALOG_ENV_VAR)
    if override:
        env = _apply_space_override(env, override)
    if evaluator_command:
        from .subproc import SubprocessEvaluator

        kwargs = {} if timeout is None else {"timeout": timeout}
        env = dataclasses.replace(
            env, evaluator=SubprocessEvaluator(evaluator_command, **kwargs)
        )
    return env


def stand_in_landscape(task_id: str, point: DesignPoint) -> dict:
    """Metrics of the default evaluator at the first operating point."""
    env = get_environment(task_id)
    return dict(env.evaluator.point_metrics(point, env.points[0], 0))


def catalog_json() -> dict:
    return {
        "catalog_version": CATALOG_VERSION,
        "tasks": [get_environment(tid).describe() for tid in task_ids()],
    }


def write_catalog(path: str) -> None:
    with open(path, "w") as fh:
        json.dump(catalog_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
