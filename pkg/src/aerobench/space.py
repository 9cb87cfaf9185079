"""Mixed design spaces: declarations, unit-cube normalization, and sampling.

A space is an ordered list of variable declarations. Continuous variables map
affinely onto [0, 1]; discrete variables map by level *index* (so irregular
level spacing does not distort the cube); categorical variables expand into a
one-hot block and decode by argmax with the lowest index winning ties.

Sampling uses numpy's Philox counter-based generator so that identical seeds
reproduce identical designs across platforms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

CONTINUOUS = "continuous"
DISCRETE = "discrete"
CATEGORICAL = "categorical"

_KINDS = (CONTINUOUS, DISCRETE, CATEGORICAL)


class SpaceError(ValueError):
    """Invalid space declaration or a point that does not fit its space."""


@dataclass(frozen=True)
class VariableSpec:
    name: str
    kind: str
    lower: float | None = None
    upper: float | None = None
    levels: tuple[Any, ...] | None = None
    unit: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise SpaceError("variable name must be non-empty")
        if self.kind not in _KINDS:
            raise SpaceError(f"unknown variable kind {self.kind!r}")
        if self.kind == CONTINUOUS:
            if self.lower is None or self.upper is None:
                raise SpaceError(f"{self.name}: continuous variable needs bounds")
            lo, hi = float(self.lower), float(self.upper)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise SpaceError(f"{self.name}: bounds must be finite with lower < upper")
            if self.levels is not None:
                raise SpaceError(f"{self.name}: continuous variable cannot have levels")
        else:
            if self.levels is None or len(self.levels) < 2:
                raise SpaceError(f"{self.name}: {self.kind} variable needs >= 2 levels")
            if len(set(self.levels)) != len(self.levels):
                raise SpaceError(f"{self.name}: levels must be distinct")
            if self.kind == DISCRETE and not all(
                isinstance(v, (int, float)) and np.isfinite(v) for v in self.levels
            ):
                raise SpaceError(f"{self.name}: discrete levels must be finite numbers")
            object.__setattr__(self, "levels", tuple(self.levels))

    @property
    def relaxed_width(self) -> int:
        if self.kind == CATEGORICAL:
            return len(self.levels)  # type: ignore[arg-type]
        return 1

    def to_json(self) -> dict:
        out: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.kind == CONTINUOUS:
            out["lower"] = float(self.lower)  # type: ignore[arg-type]
            out["upper"] = float(self.upper)  # type: ignore[arg-type]
        else:
            out["levels"] = list(self.levels)  # type: ignore[arg-type]
        if self.unit:
            out["unit"] = self.unit
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "VariableSpec":
        return cls(
            name=data["name"],
            kind=data["kind"],
            lower=data.get("lower"),
            upper=data.get("upper"),
            levels=tuple(data["levels"]) if "levels" in data else None,
            unit=data.get("unit", ""),
        )


@dataclass(frozen=True)
class DesignPoint:
    """A named assignment of values to every variable of some space."""

    values: Mapping[str, Any]
    name: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", dict(self.values))

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def to_json(self) -> dict:
        out = dict(self.values)
        if self.name is not None:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "DesignPoint":
        values = {k: v for k, v in data.items() if k != "name"}
        return cls(values=values, name=data.get("name"))


@dataclass(frozen=True)
class ParamSpace:
    variables: tuple[VariableSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SpaceError("variable names must be unique")
        if not self.variables:
            raise SpaceError("space must declare at least one variable")

    @property
    def relaxed_dim(self) -> int:
        return sum(v.relaxed_width for v in self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def var(self, name: str) -> VariableSpec:
        for v in self.variables:
            if v.name == name:
                return v
        raise SpaceError(f"unknown variable {name!r}")

    def has_kind(self, kind: str) -> bool:
        return any(v.kind == kind for v in self.variables)

    # -- validation -------------------------------------------------------

    def validate(self, point: DesignPoint) -> None:
        extra = set(point.values) - set(self.names)
        if extra:
            raise SpaceError(f"unknown variables in point: {sorted(extra)}")
        for v in self.variables:
            if v.name not in point.values:
                raise SpaceError(f"missing value for {v.name!r}")
            val = point.values[v.name]
            if v.kind == CONTINUOUS:
                x = float(val)
                if not np.isfinite(x):
                    raise SpaceError(f"{v.name}: value must be finite")
                if x < v.lower or x > v.upper:  # type: ignore[operator]
                    raise SpaceError(
                        f"{v.name}: value {x} outside [{v.lower}, {v.upper}]"
                    )
            else:
                if val not in v.levels:  # type: ignore[operator]
                    raise SpaceError(f"{v.name}: unknown level {val!r}")

    # -- unit-cube mapping -------------------------------------------------

    def normalize(self, point: DesignPoint) -> np.ndarray:
        self.validate(point)
        out = np.empty(self.relaxed_dim)
        i = 0
        for v in self.variables:
            val = point.values[v.name]
            if v.kind == CONTINUOUS:
                out[i] = (float(val) - v.lower) / (v.upper - v.lower)  # type: ignore[operator]
                i += 1
            elif v.kind == DISCRETE:
                idx = v.levels.index(val)  # type: ignore[union-attr]
                out[i] = idx / (len(v.levels) - 1)  # type: ignore[arg-type]
                i += 1
            else:
                block = np.zeros(len(v.levels))  # type: ignore[arg-type]
                block[v.levels.index(val)] = 1.0  # type: ignore[union-attr]
                out[i : i + len(block)] = block
                i += len(block)
        return out

    def denormalize(self, u: Sequence[float], name: str | None = None) -> DesignPoint:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.relaxed_dim,):
            raise SpaceError(
                f"expected vector of length {self.relaxed_dim}, got shape {u.shape}"
            )
        if not np.all(np.isfinite(u)):
            raise SpaceError("unit-cube vector must be finite")
        values: dict[str, Any] = {}
        i = 0
        for v in self.variables:
            if v.kind == CONTINUOUS:
                t = min(max(float(u[i]), 0.0), 1.0)
                values[v.name] = v.lower + t * (v.upper - v.lower)  # type: ignore[operator]
                i += 1
            elif v.kind == DISCRETE:
                t = min(max(float(u[i]), 0.0), 1.0)
                # nearest index, ties resolved toward the lower index
                idx = int(np.ceil(t * (len(v.levels) - 1) - 0.5))  # type: ignore[arg-type]
                idx = min(max(idx, 0), len(v.levels) - 1)  # type: ignore[arg-type]
                values[v.name] = v.levels[idx]  # type: ignore[index]
                i += 1
            else:
                block = u[i : i + len(v.levels)]  # type: ignore[arg-type]
                values[v.name] = v.levels[int(np.argmax(block))]  # type: ignore[index]
                i += len(v.levels)  # type: ignore[arg-type]
        return DesignPoint(values=values, name=name)

    # -- sampling and projection ------------------------------------------

    def rng(self, seed: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=seed))

    def sample_uniform(self, seed: int, n: int) -> list[DesignPoint]:
        if n < 1:
            raise SpaceError("n must be >= 1")
        rng = self.rng(seed)
        points = []
        for _ in range(n):
            values: dict[str, Any] = {}
            for v in self.variables:
                if v.kind == CONTINUOUS:
                    values[v.name] = v.lower + rng.random() * (v.upper - v.lower)  # type: ignore[operator]
                else:
                    values[v.name] = v.levels[int(rng.integers(len(v.levels)))]  # type: ignore[index]
            points.append(DesignPoint(values=values))
        return points

    def clip(self, point: DesignPoint) -> DesignPoint:
        extra = set(point.values) - set(self.names)
        if extra:
            raise SpaceError(f"unknown variables in point: {sorted(extra)}")
        values: dict[str, Any] = {}
        for v in self.variables:
            val = point.values[v.name]
            if v.kind == CONTINUOUS:
                values[v.name] = min(max(float(val), v.lower), v.upper)  # type: ignore[type-var]
            elif v.kind == DISCRETE:
                dists = [abs(float(val) - float(lv)) for lv in v.levels]  # type: ignore[union-attr]
                values[v.name] = v.levels[int(np.argmin(dists))]  # type: ignore[index]
            else:
                if val not in v.levels:  # type: ignore[operator]
                    raise SpaceError(f"{v.name}: unknown level {val!r}")
                values[v.name] = val
        return DesignPoint(values=values, name=point.name)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {"variables": [v.to_json() for v in self.variables]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ParamSpace":
        return cls(variables=tuple(VariableSpec.from_json(v) for v in data["variables"]))


def load_design(path: str) -> DesignPoint:
    with open(path) as fh:
        return DesignPoint.from_json(json.load(fh))


def save_design(point: DesignPoint, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(point.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def continuous_space(bounds: Mapping[str, tuple[float, float]], units: Mapping[str, str] | None = None) -> ParamSpace:
    """Convenience constructor for fully continuous boxes."""
    units = units or {}
    return ParamSpace(
        variables=tuple(
            VariableSpec(name=k, kind=CONTINUOUS, lower=lo, upper=hi, unit=units.get(k, ""))
            for k, (lo, hi) in bounds.items()
        )
    )
