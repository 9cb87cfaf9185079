"""Line-delimited JSON subprocess evaluator protocol."""
import sys

import pytest

from aerobench.problems import EvaluationError, SubprocessEvaluator, get_environment
from aerobench.problems.base import OperatingPoint
from aerobench.space import DesignPoint


def _command(mode="echo"):
    return [sys.executable, "-m", "aerobench.problems.echo_evaluator", mode]


@pytest.fixture
def point():
    return DesignPoint(values={"a": 1.5, "b": 2.5})


@pytest.fixture
def op():
    return OperatingPoint(alpha=3.0, weight=2.0)


class TestEchoProtocol:
    def test_round_trip(self, point, op):
        ev = SubprocessEvaluator(_command())
        try:
            metrics = ev.point_metrics(point, op, 0)
            assert metrics["param_sum"] == pytest.approx(4.0)
            assert metrics["param_count"] == 2.0
            assert metrics["weight"] == 2.0
        finally:
            ev.close()

    def test_many_round_trips_single_child(self, point, op):
        ev = SubprocessEvaluator(_command())
        try:
            for i in range(200):
                p = DesignPoint(values={"a": float(i), "b": 0.5})
                metrics = ev.point_metrics(p, op, i)
                assert metrics["param_sum"] == pytest.approx(i + 0.5)
        finally:
            ev.close()

    def test_measures_wall_time_marker(self):
        ev = SubprocessEvaluator(_command())
        assert ev.measures_wall_time is True
        ev.close()


class TestFailureModes:
    def test_crash_raises_evaluation_error_then_recovers(self, point, op):
        ev = SubprocessEvaluator(_command("crash"))
        try:
            # First request succeeds; the child exits immediately after.
            assert "param_sum" in ev.point_metrics(point, op, 0)
            # A fresh child is started lazily, so the next request also
            # succeeds, and the one after the next crash as well.
            assert "param_sum" in ev.point_metrics(point, op, 1)
            assert "param_sum" in ev.point_metrics(point, op, 2)
        finally:
            ev.close()

    def test_garbage_reply_raises(self, point, op):
        ev = SubprocessEvaluator(_command("garbage"))
        try:
            with pytest.raises(EvaluationError):
                ev.point_metrics(point, op, 0)
        finally:
            ev.close()

    def test_timeout_raises(self, point, op):
        # `cat -u` never answers; a tiny timeout must trip cleanly.
        ev = SubprocessEvaluator([sys.executable, "-c", "import time; time.sleep(60)"], timeout=0.5)
        try:
            with pytest.raises(EvaluationError):
                ev.point_metrics(point, op, 0)
        finally:
            ev.close()

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            SubprocessEvaluator([])
        with pytest.raises(ValueError):
            SubprocessEvaluator(["cmd"], timeout=0.0)


class TestEnvironmentIntegration:
    def test_environment_with_external_evaluator(self):
        env = get_environment("delta-ld-single", evaluator_command=_command())
        try:
            p = env.space.sample_uniform(seed=0, n=1)[0]
            result = env.evaluate(p)
            # The echo evaluator answers, but without the task's CL/CD
            # metrics; that surfaces as a clean error result.
            assert result.reward is None
            assert "unusable" in result.error
        finally:
            env.close()

    def test_crashing_evaluator_yields_error_result(self):
        env = get_environment("delta-ld-single", evaluator_command=_command("garbage"))
        try:
            p = env.space.sample_uniform(seed=0, n=1)[0]
            result = env.evaluate(p)
            assert result.reward is None
            assert result.error is not None
            assert not result.feasible
        finally:
            env.close()
