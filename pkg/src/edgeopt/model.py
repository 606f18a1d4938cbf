"""Objective evaluation: per-user latency, earning, and combined utility.

Every solver and baseline is scored against these functions. A user's
latency is uplink transfer + shared compute + downlink transfer, where the
assigned server's capacity is split evenly among its users (equal processor
sharing), so each user's compute time scales with the server's load. Earning
is an increasing, strictly concave function of the downlink data size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .scenario import Assignment, ResolutionPlan, Scenario

__all__ = ["Metrics", "per_user_latency", "latency", "earning", "evaluate"]


@dataclass(frozen=True, eq=False)
class Metrics:
    """Evaluation breakdown; totals are exact sums of the per-user vectors."""

    per_user_latency: np.ndarray
    total_latency: float
    per_user_earning: np.ndarray
    total_earning: float
    utility: float


def _check_inputs(s: Scenario, a: Assignment, p: ResolutionPlan):
    a.validate_for(s)
    p.validate_for(s)


def per_user_latency(s: Scenario, a: Assignment, p: ResolutionPlan) -> np.ndarray:
    """Latency vector in seconds, one entry per user."""
    _check_inputs(s, a, p)
    j = a.server_of
    load = np.bincount(j, minlength=s.n_servers)
    users = np.arange(s.n_users)
    up = s.uplink_size / s.uplink_rate[users, j]
    comp = s.compute_demand * load[j] / s.compute_capacity[j]
    down = p.d / s.downlink_rate[users, j]
    return up + comp + down


def latency(s: Scenario, a: Assignment, p: ResolutionPlan, i: int) -> float:
    """Latency of user ``i`` in seconds under the given decisions."""
    if not 0 <= i < s.n_users:
        raise ValidationError(f"user index {i} out of range [0, {s.n_users})")
    return float(per_user_latency(s, a, p)[i])


def earning(s: Scenario, d) -> float | np.ndarray:
    """Tokens earned for downlink size ``d`` (Mbit); elementwise on arrays.

    ``alpha * log(1 + beta * d)``: zero at d=0, strictly increasing, strictly
    concave, so marginal revenue falls as more data is transmitted.
    """
    arr = np.asarray(d, dtype=np.float64)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValidationError("data size must be finite and >= 0")
    up = s.utility_params
    out = up.alpha * np.log1p(up.beta * arr)
    return out if arr.ndim else float(out)


def evaluate(s: Scenario, a: Assignment, p: ResolutionPlan) -> Metrics:
    """Full metrics for one (assignment, plan) pair."""
    lat = per_user_latency(s, a, p)
    earn = np.asarray(earning(s, p.d))
    total_lat = float(np.sum(lat))
    total_earn = float(np.sum(earn))
    return Metrics(
        per_user_latency=lat,
        total_latency=total_lat,
        per_user_earning=earn,
        total_earning=total_earn,
        utility=total_earn - s.utility_params.omega * total_lat,
    )
