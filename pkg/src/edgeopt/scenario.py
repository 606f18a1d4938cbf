"""Problem instances: data model, random generator, and (de)serialization.

A scenario fixes everything about one decision epoch of an edge-served
virtual world: per user-server pair link rates, the fixed uplink payload,
per-user compute demands, per-server capacities, bounds on the downlink
data size, and the utility weights. All types are immutable after
construction; the generator is a pure function of (seed, parameters).
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ScenarioParseError, ValidationError

__all__ = [
    "UtilityParams",
    "Scenario",
    "Assignment",
    "ResolutionPlan",
    "generate_scenario",
    "save_scenario",
    "load_scenario",
    "with_params",
]


def _frozen_array(value, dtype) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class UtilityParams:
    """Weights of the scalar objective: earning minus ``omega`` times latency.

    ``alpha`` scales the earning curve and ``beta`` (per megabit) sets its
    curvature; both must be positive. ``omega`` may be zero (latency ignored).
    """

    omega: float
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega < 0:
            raise ValidationError(f"omega must be finite and >= 0, got {self.omega}")
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ValidationError(f"alpha must be finite and > 0, got {self.alpha}")
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValidationError(f"beta must be finite and > 0, got {self.beta}")


@dataclass(frozen=True, eq=False)
class Scenario:
    """One problem instance.

    Rate matrices are [n_users, n_servers] in Mbit/s; ``uplink_size`` is the
    fixed per-epoch uplink payload in Mbit; ``compute_demand`` is per-user
    megacycles per epoch, ``compute_capacity`` per-server megacycles/s.
    ``d_min``/``d_max`` bound the per-user downlink data size in Mbit.
    """

    n_users: int
    n_servers: int
    uplink_rate: np.ndarray
    downlink_rate: np.ndarray
    uplink_size: np.ndarray
    compute_demand: np.ndarray
    compute_capacity: np.ndarray
    d_min: float
    d_max: float
    utility_params: UtilityParams

    def __post_init__(self):
        if int(self.n_users) < 1:
            raise ValidationError(f"n_users must be >= 1, got {self.n_users}")
        if int(self.n_servers) < 1:
            raise ValidationError(f"n_servers must be >= 1, got {self.n_servers}")
        object.__setattr__(self, "n_users", int(self.n_users))
        object.__setattr__(self, "n_servers", int(self.n_servers))
        for name in ("uplink_rate", "downlink_rate", "uplink_size",
                     "compute_demand", "compute_capacity"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), np.float64))
        object.__setattr__(self, "d_min", float(self.d_min))
        object.__setattr__(self, "d_max", float(self.d_max))
        self._validate()

    def _validate(self):
        u, s = self.n_users, self.n_servers
        shapes = {
            "uplink_rate": (u, s),
            "downlink_rate": (u, s),
            "uplink_size": (u,),
            "compute_demand": (u,),
            "compute_capacity": (s,),
        }
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise ValidationError(f"{name} has shape {got}, expected {want}")
        for name in shapes:
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise ValidationError(f"{name} entries must be finite and strictly positive")
        if not (np.isfinite(self.d_min) and np.isfinite(self.d_max)):
            raise ValidationError("d_min and d_max must be finite")
        if not (0 < self.d_min <= self.d_max):
            raise ValidationError(
                f"need 0 < d_min <= d_max, got d_min={self.d_min}, d_max={self.d_max}")
        if not isinstance(self.utility_params, UtilityParams):
            raise ValidationError("utility_params must be a UtilityParams")

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.n_users == other.n_users
            and self.n_servers == other.n_servers
            and np.array_equal(self.uplink_rate, other.uplink_rate)
            and np.array_equal(self.downlink_rate, other.downlink_rate)
            and np.array_equal(self.uplink_size, other.uplink_size)
            and np.array_equal(self.compute_demand, other.compute_demand)
            and np.array_equal(self.compute_capacity, other.compute_capacity)
            and self.d_min == other.d_min
            and self.d_max == other.d_max
            and self.utility_params == other.utility_params
        )


@dataclass(frozen=True, eq=False)
class Assignment:
    """Maps every user to exactly one server (``server_of[i]`` in [0, n_servers))."""

    server_of: np.ndarray

    def __post_init__(self):
        arr = np.array(self.server_of, dtype=np.int64)
        if arr.ndim != 1:
            raise ValidationError(f"server_of must be 1-D, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise ValidationError("server indices must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "server_of", arr)

    @property
    def n_users(self) -> int:
        return self.server_of.shape[0]

    def validate_for(self, scenario: Scenario):
        if self.server_of.shape != (scenario.n_users,):
            raise ValidationError(
                f"assignment covers {self.server_of.shape[0]} users, "
                f"scenario has {scenario.n_users}")
        if self.server_of.size and self.server_of.max() >= scenario.n_servers:
            raise ValidationError(
                f"server index {int(self.server_of.max())} out of range "
                f"[0, {scenario.n_servers})")

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self.server_of, other.server_of)


@dataclass(frozen=True, eq=False)
class ResolutionPlan:
    """Per-user downlink data size in Mbit (the continuous decision variables)."""

    d: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.d, np.float64)
        if arr.ndim != 1:
            raise ValidationError(f"d must be 1-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("data sizes must be finite")
        object.__setattr__(self, "d", arr)

    def validate_for(self, scenario: Scenario):
        if self.d.shape != (scenario.n_users,):
            raise ValidationError(
                f"plan covers {self.d.shape[0]} users, scenario has {scenario.n_users}")
        if self.d.size and (self.d.min() < scenario.d_min or self.d.max() > scenario.d_max):
            raise ValidationError(
                f"data sizes must lie in [{scenario.d_min}, {scenario.d_max}]")

    def __eq__(self, other):
        if not isinstance(other, ResolutionPlan):
            return NotImplemented
        return np.array_equal(self.d, other.d)


def generate_scenario(
    n_users: int,
    n_servers: int,
    seed: int,
    *,
    uplink_range: tuple[float, float] = (1.0, 5.0),
    downlink_range: tuple[float, float] = (10.0, 20.0),
    uplink_size: float = 1.0,
    demand_range: tuple[float, float] = (100.0, 300.0),
    compute_capacity: float = 4000.0,
    d_min: float = 1.0,
    d_max: float = 10.0,
    omega: float = 2.0,
    alpha: float = 1.0,
    beta: float = 1.0,
    per_user_rates: bool = False,
) -> Scenario:
    """Draw a random instance; identical arguments reproduce it bit-for-bit.

    Uplink rates are i.i.d. uniform on ``uplink_range`` per user-server pair,
    downlink rates on ``downlink_range``, compute demands on ``demand_range``.
    With ``per_user_rates`` each user gets one rate shared across all servers
    instead of independent per-pair draws.
    """
    if n_users < 1 or n_servers < 1:
        raise ValidationError(
            f"need at least one user and one server, got {n_users} users, "
            f"{n_servers} servers")
    rng = np.random.default_rng(seed)
    if per_user_rates:
        up = np.repeat(rng.uniform(*uplink_range, size=(n_users, 1)), n_servers, axis=1)
        down = np.repeat(rng.uniform(*downlink_range, size=(n_users, 1)), n_servers, axis=1)
    else:
        up = rng.uniform(*uplink_range, size=(n_users, n_servers))
        down = rng.uniform(*downlink_range, size=(n_users, n_servers))
    demand = rng.uniform(*demand_range, size=n_users)
    return Scenario(
        n_users=n_users,
        n_servers=n_servers,
        uplink_rate=up,
        downlink_rate=down,
        uplink_size=np.full(n_users, float(uplink_size)),
        compute_demand=demand,
        compute_capacity=np.full(n_servers, float(compute_capacity)),
        d_min=d_min,
        d_max=d_max,
        utility_params=UtilityParams(omega=omega, alpha=alpha, beta=beta),
    )


def with_params(
    scenario: Scenario,
    *,
    omega: float | None = None,
    alpha: float | None = None,
    beta: float | None = None,
    d_min: float | None = None,
    d_max: float | None = None,
) -> Scenario:
    """Copy of ``scenario`` with selected knobs replaced; arrays are shared."""
    up = scenario.utility_params
    params = UtilityParams(
        omega=up.omega if omega is None else omega,
        alpha=up.alpha if alpha is None else alpha,
        beta=up.beta if beta is None else beta,
    )
    return dataclasses.replace(
        scenario,
        d_min=scenario.d_min if d_min is None else d_min,
        d_max=scenario.d_max if d_max is None else d_max,
        utility_params=params,
    )


# Field layout of the on-disk document. Matrices are nested lists, row-major
# (one inner list per user). Floats round-trip exactly via repr.
_SCALAR_FIELDS = ("n_users", "n_servers", "d_min", "d_max")
_ARRAY_FIELDS = ("uplink_rate", "downlink_rate", "uplink_size",
                 "compute_demand", "compute_capacity")
_PARAM_FIELDS = ("omega", "alpha", "beta")


def save_scenario(scenario: Scenario, destination: str | Path) -> None:
    """Write ``scenario`` as a UTF-8 JSON document."""
    doc: dict[str, Any] = {
        "n_users": scenario.n_users,
        "n_servers": scenario.n_servers,
        "uplink_rate": scenario.uplink_rate.tolist(),
        "downlink_rate": scenario.downlink_rate.tolist(),
        "uplink_size": scenario.uplink_size.tolist(),
        "compute_demand": scenario.compute_demand.tolist(),
        "compute_capacity": scenario.compute_capacity.tolist(),
        "d_min": scenario.d_min,
        "d_max": scenario.d_max,
        "utility_params": {
            "omega": scenario.utility_params.omega,
            "alpha": scenario.utility_params.alpha,
            "beta": scenario.utility_params.beta,
        },
    }
    Path(destination).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_scenario(source: str | Path) -> Scenario:
    """Parse a scenario document written by :func:`save_scenario`.

    Raises :class:`ScenarioParseError` naming the offending field for missing
    or non-numeric entries, and :class:`ValidationError` for documents that
    parse but violate an invariant (dimension mismatch, d_min > d_max, ...).
    """
    text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"scenario document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioParseError("scenario document must be a JSON object")

    for name in _SCALAR_FIELDS + _ARRAY_FIELDS + ("utility_params",):
        if name not in doc:
            raise ScenarioParseError(f"missing field: {name}")
    params = doc["utility_params"]
    if not isinstance(params, dict):
        raise ScenarioParseError("field utility_params must be an object")
    for name in _PARAM_FIELDS:
        if name not in params:
            raise ScenarioParseError(f"missing field: utility_params.{name}")

    def scalar(name, value, kind):
        try:
            return kind(value)
        except (TypeError, ValueError) as exc:
            raise ScenarioParseError(f"field {name} is not a number: {value!r}") from exc

    def array(name, value):
        try:
            arr = np.asarray(value, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ScenarioParseError(f"field {name} is not a numeric array") from exc
        return arr

    return Scenario(
        n_users=scalar("n_users", doc["n_users"], int),
        n_servers=scalar("n_servers", doc["n_servers"], int),
        uplink_rate=array("uplink_rate", doc["uplink_rate"]),
        downlink_rate=array("downlink_rate", doc["downlink_rate"]),
        uplink_size=array("uplink_size", doc["uplink_size"]),
        compute_demand=array("compute_demand", doc["compute_demand"]),
        compute_capacity=array("compute_capacity", doc["compute_capacity"]),
        d_min=scalar("d_min", doc["d_min"], float),
        d_max=scalar("d_max", doc["d_max"], float),
        utility_params=UtilityParams(
            omega=scalar("utility_params.omega", params["omega"], float),
            alpha=scalar("utility_params.alpha", params["alpha"], float),
            beta=scalar("utility_params.beta", params["beta"], float),
        ),
    )
