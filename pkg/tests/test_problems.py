"""Catalog environments: evaluation, penalties, constraints, overrides."""
import json
import os

import numpy as np
import pytest

from aerobench.problems import (
    EvaluationError,
    MAXIMIZE,
    MINIMIZE,
    catalog_json,
    function_environment,
    get_environment,
    task_ids,
    write_catalog,
)
from aerobench.problems.catalog import CATALOG_ENV_VAR
from aerobench.space import DesignPoint, SpaceError, continuous_space

ALL_TASKS = task_ids()


@pytest.mark.parametrize("task_id", ALL_TASKS)
def test_evaluation_is_deterministic(task_id):
    env = get_environment(task_id)
    try:
        point = env.space.sample_uniform(seed=11, n=1)[0]
        a = env.evaluate(point)
        b = env.evaluate(point)
        assert a.reward == b.reward
        assert a.metrics == b.metrics
        assert a.violations == b.violations
    finally:
        env.close()


@pytest.mark.parametrize("task_id", ALL_TASKS)
def test_rewards_finite_and_violations_bounded(task_id):
    env = get_environment(task_id)
    try:
        for point in env.space.sample_uniform(seed=3, n=20):
            result = env.evaluate(point)
            assert result.error is None
            assert np.isfinite(result.reward)
            for name, v in result.violations.items():
                assert 0.0 <= v <= 1.0, (name, v)
            assert result.feasible == (sum(result.violations.values()) == 0.0)
    finally:
        env.close()


def test_task_catalog_contents():
    assert len(ALL_TASKS) == 12
    assert "airfoil-ld-single" in ALL_TASKS
    assert "ceras-fuel-mixed" in ALL_TASKS


def test_unknown_task_rejected():
    with pytest.raises(KeyError):
        get_environment("not-a-task")


def test_penalty_dominates_airfoil_objective():
    """One full violation outweighs the maximum attainable raw objective."""
    env = get_environment("airfoil-ld-single")
    try:
        assert env.penalty_weight == 500.0
        # Raw L/D is bounded by CL_hi / CD_lo, which the penalty exceeds.
        assert env.penalty_weight > 1.8 / 0.006 * 0.9
    finally:
        env.close()


def test_minimize_tasks_negate_reward():
    env = get_environment("car-drag-single")
    try:
        point = env.space.sample_uniform(seed=5, n=1)[0]
        result = env.evaluate(point)
        assert env.sense == MINIMIZE
        # Reward is the negated objective for minimization tasks.
        assert result.reward == pytest.approx(-result.metrics["objective"])
    finally:
        env.close()


def test_ceras_static_margin_window():
    env = get_environment("ceras-fuel-mixed")
    try:
        names = {c.name for c in env.constraints}
        assert names == {"static_margin_low", "static_margin_high"}
        assert env.penalty_weight == 20000.0
        results = [env.evaluate(p) for p in env.space.sample_uniform(seed=2, n=30)]
        # The margin window must actually bind for some sampled designs.
        assert any(sum(r.violations.values()) > 0 for r in results)
        for r in results:
            sm = r.metrics["StaticMargin"]
            low = r.violations["static_margin_low"]
            high = r.violations["static_margin_high"]
            if 0.05 <= sm <= 0.1:
                assert low == 0.0 and high == 0.0
    finally:
        env.close()


def test_multipoint_tasks_charge_one_budget_unit():
    """A six-point evaluation is still one evaluate() call with 6 rows."""
    env = get_environment("airfoil-drag-multipoint")
    try:
        point = env.space.sample_uniform(seed=1, n=1)[0]
        result = env.evaluate(point)
        assert len(result.per_point) == 6
    finally:
        env.close()


def test_bwb_bisection_metrics_present():
    env = get_environment("bwb-drag-multipoint")
    try:
        point = env.space.sample_uniform(seed=8, n=1)[0]
        result = env.evaluate(point)
        for pp in result.per_point:
            assert -5.0 <= pp["alpha_star"] <= 12.0
            assert pp["bracketed"] in (0.0, 1.0)
    finally:
        env.close()


@pytest.mark.parametrize("task_id", ALL_TASKS)
def test_analytic_gradient_matches_fd(task_id):
    env = get_environment(task_id)
    try:
        if env.landscape_gradient is None:
            pytest.skip("no analytic landscape for this task")
        rng = np.random.Generator(np.random.Philox(key=99))
        dim = env.space.relaxed_dim
        eps = 1e-6
        for _ in range(10):
            u = 0.05 + 0.9 * rng.random(dim)
            grad = env.landscape_gradient(u)
            for i in rng.choice(dim, size=min(dim, 5), replace=False):
                up, um = u.copy(), u.copy()
                up[i] += eps
                um[i] -= eps
                fd = (env.landscape_value(up) - env.landscape_value(um)) / (2 * eps)
                assert grad[i] == pytest.approx(fd, abs=1e-5)
    finally:
        env.close()


def test_describe_is_json_serializable():
    for task_id in ALL_TASKS:
        env = get_environment(task_id)
        try:
            entry = env.describe()
            json.dumps(entry)
            assert entry["id"] == task_id
            assert entry["relaxed_dim"] == env.space.relaxed_dim
        finally:
            env.close()


def test_catalog_json_round_trip(tmp_path):
    data = catalog_json()
    assert len(data["tasks"]) == 12
    path = tmp_path / "catalog.json"
    write_catalog(str(path))
    assert json.loads(path.read_text())["tasks"] == data["tasks"]


class TestCatalogOverride:
    def _override_file(self, tmp_path, mutate):
        env = get_environment("delta-ld-single")
        space = json.loads(json.dumps(env.space.to_json()))
        env.close()
        mutate(space)
        path = tmp_path / "override.json"
        path.write_text(json.dumps({"tasks": {"delta-ld-single": {"space": space}}}))
        return str(path)

    def test_bounds_override_applied(self, tmp_path, monkeypatch):
        def widen(space):
            for var in space["variables"]:
                if var["name"] == "sweep_angle":
                    var["lower"], var["upper"] = 50.0, 80.0

        monkeypatch.setenv(CATALOG_ENV_VAR, self._override_file(tmp_path, widen))
        env = get_environment("delta-ld-single")
        try:
            var = env.space.var("sweep_angle")
            assert (var.lower, var.upper) == (50.0, 80.0)
        finally:
            env.close()

    def test_name_mismatch_rejected(self, tmp_path, monkeypatch):
        def rename(space):
            space["variables"][0]["name"] = "renamed"

        monkeypatch.setenv(CATALOG_ENV_VAR, self._override_file(tmp_path, rename))
        with pytest.raises(ValueError):
            get_environment("delta-ld-single")

    def test_kind_mismatch_rejected(self, tmp_path, monkeypatch):
        def requantize(space):
            for var in space["variables"]:
                if var["kind"] == "continuous":
                    var.pop("lower")
                    var.pop("upper")
                    var["kind"] = "discrete"
                    var["levels"] = [1, 2]
                    break

        monkeypatch.setenv(CATALOG_ENV_VAR, self._override_file(tmp_path, requantize))
        with pytest.raises(ValueError):
            get_environment("delta-ld-single")


class TestFunctionEnvironment:
    def test_wraps_scalar_function(self):
        space = continuous_space({"x": (-2.0, 2.0)})
        env = function_environment(space, lambda u: float(u[0] ** 2), MINIMIZE)
        result = env.evaluate(DesignPoint(values={"x": 1.0}))
        # x=1 -> u=0.75 -> value 0.5625, negated for minimization
        assert result.reward == pytest.approx(-0.5625)
        assert result.feasible

    def test_invalid_point_raises(self):
        space = continuous_space({"x": (-2.0, 2.0)})
        env = function_environment(space, lambda u: 0.0)
        with pytest.raises(SpaceError):
            env.evaluate(DesignPoint(values={"x": 5.0}))


class _BrokenEvaluator:
    def point_metrics(self, point, op, index):
        raise EvaluationError("synthetic failure")


def test_evaluator_failure_becomes_error_result():
    env = get_environment("delta-ld-single").with_evaluator(_BrokenEvaluator())
    point = env.space.sample_uniform(seed=1, n=1)[0]
    result = env.evaluate(point)
    assert result.error == "synthetic failure"
    assert result.reward is None
    assert not result.feasible
