"""Alternating-optimization outer loop and the three baseline strategies.

The proposed method alternates an exact closed-form data-size step with a
heuristic association step (relaxation + rounding + repair, or greedy +
repair beyond the relaxation size cap), accepting a new association only
when utility strictly improves, so the utility trace never decreases.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

import numpy as np

from .association import (
    _seed_entropy,
    build_qcqp,
    greedy_association,
    local_repair,
    round_solution,
    solve_sdp_relaxation,
)
from .datasize import optimal_data_sizes
from .errors import SolverFailureError, ValidationError
from .model import Metrics, evaluate, per_user_latency
from .scenario import Assignment, ResolutionPlan, Scenario

__all__ = [
    "STRATEGIES",
    "Diagnostics",
    "SolveResult",
    "alternating_optimize",
    "baseline_optimal_earning",
    "baseline_optimal_latency",
    "baseline_random",
    "solve_strategy",
    "DEFAULT_SDR_SIZE_CAP",
    "DEFAULT_SAMPLES",
]

STRATEGIES = ("optimal_latency_earning", "optimal_earning", "optimal_latency", "random")

DEFAULT_SDR_SIZE_CAP = 60
DEFAULT_SAMPLES = 100

# Seed-entropy salts keeping the strategies' random streams disjoint.
_SALT_ALTERNATING = 101
_SALT_EARNING = 102
_SALT_LATENCY = 103
_SALT_RANDOM = 104


@dataclass(frozen=True)
class Diagnostics:
    """Solver-side metadata: relaxation gap, fallbacks taken, wall time."""

    sdr_gap: float | None
    fallbacks: tuple[str, ...]
    sdp_failures: int
    wall_time: float


@dataclass(frozen=True, eq=False)
class SolveResult:
    assignment: Assignment
    plan: ResolutionPlan
    metrics: Metrics
    strategy: str
    iterations: int
    utility_trace: tuple[float, ...]
    diagnostics: Diagnostics


def _association_step(
    s: Scenario,
    p: ResolutionPlan,
    seed,
    samples: int,
    sdr_size_cap: int,
    sdr_subsample: int,
) -> tuple[Assignment, float | None, tuple[str, ...], int]:
    """One latency-minimizing association update for a fixed plan.

    Returns (assignment, sdr gap or None, fallback flags, sdp failure count).
    Within the size cap: relaxation + rounding + repair; beyond it: greedy +
    repair, or rounding of a user-subsampled relaxation when enabled.
    """
    n = s.n_users * s.n_servers
    if n <= sdr_size_cap:
        try:
            qp = build_qcqp(s, p)
            sol = solve_sdp_relaxation(qp)
            a = local_repair(s, p, round_solution(sol, qp, s, p, samples=samples, seed=seed))
            gap = float(np.sum(per_user_latency(s, a, p))) - sol.lower_bound
            return a, gap, (), 0
        except SolverFailureError:
            a = local_repair(s, p, greedy_association(s, p))
            return a, None, ("sdp_failure",), 1
    if sdr_subsample > 0:
        a, failures = _subsampled_round(s, p, seed, samples, sdr_subsample)
        flags = ("size_cap", "subsample") + (("sdp_failure",) if failures else ())
        return a, None, flags, failures
    a = local_repair(s, p, greedy_association(s, p))
    return a, None, ("size_cap",), 0


def _subsampled_round(s, p, seed, samples, k):
    """Relax and round a k-user subproblem, fill the rest greedily, repair all."""
    rng = np.random.default_rng((*_seed_entropy(seed), 777))
    k = min(k, s.n_users)
    chosen = np.sort(rng.choice(s.n_users, size=k, replace=False))
    sub = dataclasses.replace(
        s,
        n_users=k,
        uplink_rate=s.uplink_rate[chosen],
        downlink_rate=s.downlink_rate[chosen],
        uplink_size=s.uplink_size[chosen],
        compute_demand=s.compute_demand[chosen],
    )
    sub_plan = ResolutionPlan(p.d[chosen])
    base = np.array(greedy_association(s, p).server_of)
    failures = 0
    try:
        qp = build_qcqp(sub, sub_plan)
        sol = solve_sdp_relaxation(qp)
        rounded = round_solution(sol, qp, sub, sub_plan, samples=samples, seed=seed)
        base[chosen] = rounded.server_of
    except SolverFailureError:
        failures = 1
    return local_repair(s, p, Assignment(base)), failures


def alternating_optimize(
    s: Scenario,
    max_iters: int = 20,
    tol: float = 1e-6,
    seed: int = 0,
    *,
    samples: int = DEFAULT_SAMPLES,
    sdr_size_cap: int = DEFAULT_SDR_SIZE_CAP,
    sdr_subsample: int = 0,
) -> SolveResult:
    """The proposed strategy: alternate data-size and association updates.

    Starts from a load-blind greedy assignment at ``d_max``, then repeats:
    closed-form optimal data sizes for the current assignment, followed by a
    candidate association for the new plan, accepted only on strict utility
    improvement. Stops when the relative improvement drops below ``tol`` or
    after ``max_iters`` iterations. Never aborts on relaxation failures;
    those fall back to greedy + repair and are flagged in the diagnostics.
    """
    if max_iters < 1:
        raise ValidationError(f"max_iters must be >= 1, got {max_iters}")
    if not tol > 0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    t0 = time.perf_counter()
    entropy = _seed_entropy((seed, _SALT_ALTERNATING))

    plan = ResolutionPlan(np.full(s.n_users, s.d_max))
    assignment = greedy_association(s, plan)
    utility = evaluate(s, assignment, plan).utility
    trace = [utility]
    fallbacks: set[str] = set()
    sdp_failures = 0
    sdr_gap = None

    for iteration in range(1, max_iters + 1):
        new_plan = optimal_data_sizes(s, assignment)
        u_plan = evaluate(s, assignment, new_plan).utility
        candidate, gap, flags, failures = _association_step(
            s, new_plan, seed=(*entropy, iteration), samples=samples,
            sdr_size_cap=sdr_size_cap, sdr_subsample=sdr_subsample)
        u_candidate = evaluate(s, candidate, new_plan).utility
        fallbacks.update(flags)
        sdp_failures += failures
        if gap is not None:
            sdr_gap = gap

        best_u, best_state = utility, (assignment, plan)
        if u_plan > best_u:
            best_u, best_state = u_plan, (assignment, new_plan)
        if u_candidate > best_u:
            best_u, best_state = u_candidate, (candidate, new_plan)
        improvement = (best_u - utility) / max(1.0, abs(utility))
        assignment, plan = best_state
        utility = best_u
        trace.append(utility)
        if improvement < tol:
            break

    return SolveResult(
        assignment=assignment,
        plan=plan,
        metrics=evaluate(s, assignment, plan),
        strategy="optimal_latency_earning",
        iterations=len(trace) - 1,
        utility_trace=tuple(trace),
        diagnostics=Diagnostics(
            sdr_gap=sdr_gap,
            fallbacks=tuple(sorted(fallbacks)),
            sdp_failures=sdp_failures,
            wall_time=time.perf_counter() - t0,
        ),
    )


def baseline_optimal_earning(s: Scenario, seed: int = 0) -> SolveResult:
    """Maximum profits, delay ignored: d_max everywhere, random association."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(_seed_entropy((seed, _SALT_EARNING)))
    assignment = Assignment(rng.integers(0, s.n_servers, size=s.n_users))
    plan = ResolutionPlan(np.full(s.n_users, s.d_max))
    metrics = evaluate(s, assignment, plan)
    return SolveResult(
        assignment=assignment,
        plan=plan,
        metrics=metrics,
        strategy="optimal_earning",
        iterations=1,
        utility_trace=(metrics.utility,),
        diagnostics=Diagnostics(
            sdr_gap=None, fallbacks=(), sdp_failures=0,
            wall_time=time.perf_counter() - t0),
    )


def baseline_optimal_latency(
    s: Scenario,
    seed: int = 0,
    *,
    samples: int = DEFAULT_SAMPLES,
    sdr_size_cap: int = DEFAULT_SDR_SIZE_CAP,
    sdr_subsample: int = 0,
) -> SolveResult:
    """Minimum delay only: smallest data size, latency-minimizing association."""
    t0 = time.perf_counter()
    plan = ResolutionPlan(np.full(s.n_users, s.d_min))
    assignment, gap, flags, failures = _association_step(
        s, plan, seed=(*_seed_entropy((seed, _SALT_LATENCY)), 1), samples=samples,
        sdr_size_cap=sdr_size_cap, sdr_subsample=sdr_subsample)
    metrics = evaluate(s, assignment, plan)
    return SolveResult(
        assignment=assignment,
        plan=plan,
        metrics=metrics,
        strategy="optimal_latency",
        iterations=1,
        utility_trace=(metrics.utility,),
        diagnostics=Diagnostics(
            sdr_gap=gap, fallbacks=flags, sdp_failures=failures,
            wall_time=time.perf_counter() - t0),
    )


def baseline_random(s: Scenario, seed: int = 0) -> SolveResult:
    """Uniformly random association and data sizes, deterministic per seed."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(_seed_entropy((seed, _SALT_RANDOM)))
    assignment = Assignment(rng.integers(0, s.n_servers, size=s.n_users))
    plan = ResolutionPlan(rng.uniform(s.d_min, s.d_max, size=s.n_users))
    metrics = evaluate(s, assignment, plan)
    return SolveResult(
        assignment=assignment,
        plan=plan,
        metrics=metrics,
        strategy="random",
        iterations=1,
        utility_trace=(metrics.utility,),
        diagnostics=Diagnostics(
            sdr_gap=None, fallbacks=(), sdp_failures=0,
            wall_time=time.perf_counter() - t0),
    )


def solve_strategy(
    s: Scenario,
    strategy: str,
    seed: int = 0,
    *,
    max_iters: int = 20,
    tol: float = 1e-6,
    samples: int = DEFAULT_SAMPLES,
    sdr_size_cap: int = DEFAULT_SDR_SIZE_CAP,
    sdr_subsample: int = 0,
) -> SolveResult:
    """Dispatch one solve by strategy label."""
    if strategy == "optimal_latency_earning":
        return alternating_optimize(
            s, max_iters=max_iters, tol=tol, seed=seed, samples=samples,
            sdr_size_cap=sdr_size_cap, sdr_subsample=sdr_subsample)
    if strategy == "optimal_earning":
        return baseline_optimal_earning(s, seed)
    if strategy == "optimal_latency":
        return baseline_optimal_latency(
            s, seed, samples=samples, sdr_size_cap=sdr_size_cap,
            sdr_subsample=sdr_subsample)
    if strategy == "random":
        return baseline_random(s, seed)
    raise ValidationError(
        f"unknown strategy {strategy!r}; valid strategies: {', '.join(STRATEGIES)}")
