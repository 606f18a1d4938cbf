"""Closed-form solve of the continuous subproblem (association held fixed).

With the assignment fixed, utility separates per user: each user i trades
``alpha*log(1 + beta*d)`` earning against ``omega*d/r`` downlink latency at
their server's rate r. The stationary point of that concave objective is
``d = alpha*r/omega - 1/beta``, clipped to the instance bounds.
"""

from __future__ import annotations

import numpy as np

from .scenario import Assignment, ResolutionPlan, Scenario

__all__ = ["optimal_data_sizes", "unconstrained_optimum"]


def unconstrained_optimum(alpha: float, beta: float, omega: float, rate) -> np.ndarray:
    """Stationary point of the per-user objective at downlink rate ``rate``.

    Requires ``omega > 0``; may be negative (the box constraint then binds).
    """
    return alpha * np.asarray(rate, dtype=np.float64) / omega - 1.0 / beta


def optimal_data_sizes(s: Scenario, a: Assignment) -> ResolutionPlan:
    """Utility-maximizing downlink sizes for a fixed assignment.

    For ``omega == 0`` latency carries no weight and the increasing earning
    function pushes every user to ``d_max``.
    """
    a.validate_for(s)
    up = s.utility_params
    if up.omega == 0:
        return ResolutionPlan(np.full(s.n_users, s.d_max))
    rates = s.downlink_rate[np.arange(s.n_users), a.server_of]
    d_star = unconstrained_optimum(up.alpha, up.beta, up.omega, rates)
    return ResolutionPlan(np.clip(d_star, s.d_min, s.d_max))
