"""Design-space declarations, unit-cube mapping, and sampling."""
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aerobench.space import (
    CATEGORICAL,
    CONTINUOUS,
    DISCRETE,
    DesignPoint,
    ParamSpace,
    SpaceError,
    VariableSpec,
    continuous_space,
)
from aerobench.problems.catalog import get_environment


@pytest.fixture
def mixed_space():
    return ParamSpace(
        variables=(
            VariableSpec(name="chord", kind=CONTINUOUS, lower=0.5, upper=2.0),
            VariableSpec(name="n_engines", kind=DISCRETE, levels=(2, 3, 4)),
            VariableSpec(name="tail", kind=CATEGORICAL, levels=("conventional", "t-tail", "h-tail")),
        )
    )


class TestDeclarations:
    def test_continuous_needs_bounds(self):
        with pytest.raises(SpaceError):
            VariableSpec(name="x", kind=CONTINUOUS)

    def test_bounds_must_be_ordered(self):
        with pytest.raises(SpaceError):
            VariableSpec(name="x", kind=CONTINUOUS, lower=2.0, upper=1.0)

    def test_levels_must_be_distinct(self):
        with pytest.raises(SpaceError):
            VariableSpec(name="k", kind=DISCRETE, levels=(1, 1, 2))

    def test_unique_names(self):
        v = VariableSpec(name="x", kind=CONTINUOUS, lower=0, upper=1)
        with pytest.raises(SpaceError):
            ParamSpace(variables=(v, v))

    def test_relaxed_dim_counts_one_hot(self, mixed_space):
        # 1 continuous + 1 discrete + 3-level categorical one-hot block
        assert mixed_space.relaxed_dim == 5

    def test_ceras_relaxed_dim(self):
        env = get_environment("ceras-fuel-mixed")
        assert env.space.relaxed_dim == 12
        env.close()


class TestRoundTrip:
    def test_normalize_denormalize_identity(self, mixed_space):
        point = DesignPoint(values={"chord": 1.1, "n_engines": 3, "tail": "t-tail"})
        u = mixed_space.normalize(point)
        back = mixed_space.denormalize(u)
        assert back.values["n_engines"] == 3
        assert back.values["tail"] == "t-tail"
        assert back.values["chord"] == pytest.approx(1.1)

    def test_discrete_level_index_normalization(self, mixed_space):
        # Levels normalize by index, not by value.
        for i, level in enumerate((2, 3, 4)):
            p = DesignPoint(values={"chord": 1.0, "n_engines": level, "tail": "t-tail"})
            assert mixed_space.normalize(p)[1] == pytest.approx(i / 2)

    def test_discrete_decode_nearest_with_lower_tie(self, mixed_space):
        # t=0.25 is equidistant between indices 0 and 1: lower index wins.
        u = np.array([0.5, 0.25, 1.0, 0.0, 0.0])
        assert mixed_space.denormalize(u).values["n_engines"] == 2
        u[1] = 0.26
        assert mixed_space.denormalize(u).values["n_engines"] == 3

    def test_categorical_argmax_lowest_tie(self, mixed_space):
        u = np.array([0.5, 0.0, 0.4, 0.4, 0.1])
        assert mixed_space.denormalize(u).values["tail"] == "conventional"

    def test_denormalize_clips_out_of_cube(self, mixed_space):
        u = np.array([1.7, -0.2, 0.0, 1.0, 0.0])
        point = mixed_space.denormalize(u)
        assert point.values["chord"] == pytest.approx(2.0)
        assert point.values["n_engines"] == 2

    def test_wrong_length_rejected(self, mixed_space):
        with pytest.raises(SpaceError):
            mixed_space.denormalize(np.zeros(3))


class TestValidation:
    def test_missing_variable(self, mixed_space):
        with pytest.raises(SpaceError):
            mixed_space.validate(DesignPoint(values={"chord": 1.0}))

    def test_unknown_variable(self, mixed_space):
        p = DesignPoint(values={"chord": 1.0, "n_engines": 2, "tail": "t-tail", "zz": 1})
        with pytest.raises(SpaceError):
            mixed_space.validate(p)

    def test_out_of_bounds(self, mixed_space):
        p = DesignPoint(values={"chord": 3.0, "n_engines": 2, "tail": "t-tail"})
        with pytest.raises(SpaceError):
            mixed_space.validate(p)

    def test_bound_values_are_inclusive(self, mixed_space):
        p = DesignPoint(values={"chord": 2.0, "n_engines": 2, "tail": "t-tail"})
        mixed_space.validate(p)

    def test_clip_snaps_discrete_to_nearest(self, mixed_space):
        p = DesignPoint(values={"chord": 99.0, "n_engines": 3.4, "tail": "h-tail"})
        c = mixed_space.clip(p)
        assert c.values["chord"] == 2.0
        assert c.values["n_engines"] == 3


class TestSampling:
    def test_same_seed_identical(self, mixed_space):
        a = mixed_space.sample_uniform(seed=7, n=20)
        b = mixed_space.sample_uniform(seed=7, n=20)
        assert [p.values for p in a] == [p.values for p in b]

    def test_different_seeds_differ(self, mixed_space):
        a = mixed_space.sample_uniform(seed=1, n=10)
        b = mixed_space.sample_uniform(seed=2, n=10)
        assert [p.values for p in a] != [p.values for p in b]

    def test_samples_valid(self, mixed_space):
        for p in mixed_space.sample_uniform(seed=3, n=50):
            mixed_space.validate(p)

    def test_continuous_coverage(self):
        space = continuous_space({"x": (0.0, 1.0)})
        xs = [p.values["x"] for p in space.sample_uniform(seed=0, n=2000)]
        assert min(xs) < 0.05 and max(xs) > 0.95
        assert abs(np.mean(xs) - 0.5) < 0.05


class TestSerialization:
    def test_space_json_round_trip(self, mixed_space):
        data = json.loads(json.dumps(mixed_space.to_json()))
        again = ParamSpace.from_json(data)
        assert again == mixed_space

    def test_design_json_round_trip(self):
        p = DesignPoint(values={"a": 1.5, "b": "x"}, name="d1")
        q = DesignPoint.from_json(json.loads(json.dumps(p.to_json())))
        assert q.values == p.values and q.name == "d1"


@given(
    u=st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=5, max_size=5)
)
@settings(max_examples=200, deadline=None)
def test_denormalize_normalize_is_projection(u):
    """denormalize then normalize then denormalize is stable (idempotent)."""
    space = ParamSpace(
        variables=(
            VariableSpec(name="c", kind=CONTINUOUS, lower=-1.0, upper=3.0),
            VariableSpec(name="d", kind=DISCRETE, levels=(0, 10, 20, 50)),
            VariableSpec(name="k", kind=CATEGORICAL, levels=("a", "b", "c")),
        )
    )
    p1 = space.denormalize(np.asarray(u))
    p2 = space.denormalize(space.normalize(p1))
    assert p1.values == p2.values


@given(seed=st.integers(min_value=0, max_value=2**31))
@settings(max_examples=50, deadline=None)
def test_philox_sampling_is_seed_deterministic(seed):
    space = continuous_space({"x": (0.0, 2.0), "y": (-1.0, 1.0)})
    a = space.sample_uniform(seed=seed, n=3)
    b = space.sample_uniform(seed=seed, n=3)
    assert [p.values for p in a] == [p.values for p in b]
