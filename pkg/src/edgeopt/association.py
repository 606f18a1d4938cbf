"""Integer subproblem: user-server association with data sizes fixed.

Minimizing total latency over assignments is a binary QCQP: one 0/1
variable per (user, server) pair, a linear term for transfer latency, and a
quadratic same-server coupling from equal processor sharing. The pipeline
lifts the QCQP to a semidefinite relaxation, rounds the relaxed solution by
Gaussian randomization, then strengthens it with single-user best-response
moves. An exhaustive enumerator provides ground truth on small instances.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .errors import CapacityError, SolverFailureError, ValidationError
from .model import per_user_latency
from .scenario import Assignment, ResolutionPlan, Scenario

__all__ = [
    "Qcqp",
    "SdpResiduals",
    "SdpSolution",
    "build_qcqp",
    "encode_assignment",
    "qcqp_objective",
    "solve_sdp_relaxation",
    "round_solution",
    "local_repair",
    "greedy_association",
    "exhaustive_association",
    "MAX_ENUMERATION",
]

MAX_ENUMERATION = 10**7

# Minimum strict improvement for an accepted best-response move; guards
# against cycling on floating-point noise.
_MOVE_EPS = 1e-12


def _seed_entropy(seed) -> tuple[int, ...]:
    """Normalize a seed (possibly negative) into SeedSequence entropy words."""
    if isinstance(seed, (tuple, list)):
        return tuple(int(x) & 0xFFFFFFFFFFFFFFFF for x in seed)
    return (int(seed) & 0xFFFFFFFFFFFFFFFF,)


def _total_latency(s: Scenario, a: Assignment, p: ResolutionPlan) -> float:
    return float(np.sum(per_user_latency(s, a, p)))


@dataclass(frozen=True, eq=False)
class Qcqp:
    """Latency objective over flattened binary variables x[(i,j)] = i*S + j.

    ``x.T @ Q @ x + q @ x`` equals the model's total latency for every
    feasible one-hot encoding. ``assignment_rows`` lists, per user, the flat
    indices whose variables must sum to one.
    """

    n: int
    Q: np.ndarray
    q: np.ndarray
    assignment_rows: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class SdpResiduals:
    """Constraint-violation and eigenvalue diagnostics of a returned SDP point."""

    corner: float
    binary: float
    assignment: float
    min_eigenvalue: float


@dataclass(frozen=True, eq=False)
class SdpSolution:
    """Optimum of the lifted relaxation; ``lower_bound`` = tr(C @ Y)."""

    Y: np.ndarray
    lower_bound: float
    residuals: SdpResiduals


def build_qcqp(s: Scenario, p: ResolutionPlan) -> Qcqp:
    """Assemble the latency QCQP for the given data-size plan.

    Linear coefficients carry uplink + downlink transfer times; the
    quadratic block couples users sharing a server: summed over a one-hot x,
    ``(demand_i + demand_k) / (2 cap_j)`` reproduces load * demand_sum / cap
    per server, the total equal-sharing compute latency.
    """
    p.validate_for(s)
    u, srv = s.n_users, s.n_servers
    n = u * srv
    q = (s.uplink_size[:, None] / s.uplink_rate + p.d[:, None] / s.downlink_rate).ravel()
    Q = np.zeros((n, n))
    pair = s.compute_demand[:, None] + s.compute_demand[None, :]
    for j in range(srv):
        idx = np.arange(u) * srv + j
        Q[np.ix_(idx, idx)] = pair / (2.0 * s.compute_capacity[j])
    rows = tuple(np.arange(i * srv, (i + 1) * srv) for i in range(u))
    return Qcqp(n=n, Q=Q, q=q, assignment_rows=rows)


def encode_assignment(a: Assignment, n_servers: int) -> np.ndarray:
    """One-hot flattening of an assignment into the QCQP variable layout."""
    u = a.n_users
    x = np.zeros(u * n_servers)
    x[np.arange(u) * n_servers + a.server_of] = 1.0
    return x


def qcqp_objective(qp: Qcqp, x: np.ndarray) -> float:
    return float(x @ qp.Q @ x + qp.q @ x)


def solve_sdp_relaxation(qp: Qcqp, tol: float = 1e-6, max_iters: int = 500) -> SdpSolution:
    """Solve the lifted PSD relaxation of the binary QCQP.

    Minimizes tr(C Y) over Y >= 0 with Y[n,n] = 1, the exact 0/1 lifting
    Y[k,k] = Y[k,n], and each user's border entries summing to one. Raises
    :class:`SolverFailureError` if the solver stops short of the accuracy
    contract (corner 1e-8, constraints ``tol``, eigenvalue -1e-7).
    """
    n = qp.n
    C = np.zeros((n + 1, n + 1))
    C[:n, :n] = qp.Q
    C[:n, n] = qp.q / 2.0
    C[n, :n] = qp.q / 2.0

    Y = cp.Variable((n + 1, n + 1), PSD=True)
    constraints = [Y[n, n] == 1]
    if n:
        constraints.append(cp.diag(Y)[:n] == Y[:n, n])
    for idx in qp.assignment_rows:
        constraints.append(cp.sum(Y[idx, n]) == 1)
    problem = cp.Problem(cp.Minimize(cp.trace(C @ Y)), constraints)
    try:
        # cvxpy warns on inaccurate statuses; the residual gates below are
        # the binding accuracy check, so the warning is redundant here.
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", message="Solution may be inaccurate")
            problem.solve(
                solver=cp.CLARABEL,
                max_iter=max_iters,
                tol_gap_abs=tol * 1e-3,
                tol_gap_rel=tol * 1e-3,
                tol_feas=tol * 1e-3,
            )
    except cp.error.SolverError as exc:
        raise SolverFailureError(f"relaxation solver failed: {exc}") from exc
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) or Y.value is None:
        raise SolverFailureError(f"relaxation solver stopped with status {problem.status}")

    Ysym = (Y.value + Y.value.T) / 2.0
    border = Ysym[:n, n]
    residuals = SdpResiduals(
        corner=abs(Ysym[n, n] - 1.0),
        binary=float(np.max(np.abs(np.diag(Ysym)[:n] - border))) if n else 0.0,
        assignment=max(
            (abs(float(np.sum(border[idx])) - 1.0) for idx in qp.assignment_rows),
            default=0.0,
        ),
        min_eigenvalue=float(np.linalg.eigvalsh(Ysym)[0]),
    )
    if (residuals.corner > 1e-8 or residuals.binary > tol
            or residuals.assignment > tol or residuals.min_eigenvalue < -1e-7):
        raise SolverFailureError(
            f"relaxation residuals exceed tolerance: {residuals}", residuals=residuals)
    Ysym.setflags(write=False)
    return SdpSolution(Y=Ysym, lower_bound=float(np.vdot(C, Ysym)), residuals=residuals)


def _decode(vec: np.ndarray, n_users: int, n_servers: int) -> Assignment:
    # Per-user argmax; np.argmax breaks ties toward the lowest server index.
    return Assignment(vec.reshape(n_users, n_servers).argmax(axis=1))


def round_solution(
    sol: SdpSolution,
    qp: Qcqp,
    s: Scenario,
    p: ResolutionPlan,
    samples: int = 100,
    seed: int = 0,
) -> Assignment:
    """Gaussian-randomization rounding of a relaxation optimum.

    Treats the border column as a mean and the centered top-left block
    (negative eigenvalues clipped to zero) as a covariance, draws ``samples``
    vectors, decodes each by per-user argmax, and keeps the candidate with
    the lowest exact model latency. The deterministic decode of the border
    column itself is always among the candidates.
    """
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    if qp.n != s.n_users * s.n_servers:
        raise ValidationError(
            f"QCQP has {qp.n} variables, scenario implies {s.n_users * s.n_servers}")
    n = qp.n
    xbar = np.asarray(sol.Y[:n, n])
    cov = sol.Y[:n, :n] - np.outer(xbar, xbar)
    w, V = np.linalg.eigh((cov + cov.T) / 2.0)
    scale = V * np.sqrt(np.clip(w, 0.0, None))

    best = _decode(xbar, s.n_users, s.n_servers)
    best_lat = _total_latency(s, best, p)
    entropy = _seed_entropy(seed)
    for trial in range(samples):
        rng = np.random.default_rng((*entropy, trial))
        draw = xbar + scale @ rng.standard_normal(n)
        cand = _decode(draw, s.n_users, s.n_servers)
        lat = _total_latency(s, cand, p)
        if lat < best_lat:
            best, best_lat = cand, lat
    return best


def local_repair(s: Scenario, p: ResolutionPlan, a: Assignment) -> Assignment:
    """Single-user best-response passes until no move reduces total latency.

    Users are visited in index order; each moves to the server minimizing
    total latency given everyone else (ties to the lowest index). Every
    accepted move strictly decreases total latency, so the loop terminates.
    """
    a.validate_for(s)
    p.validate_for(s)
    server = np.array(a.server_of)
    fixed = s.uplink_size[:, None] / s.uplink_rate + p.d[:, None] / s.downlink_rate
    demand = s.compute_demand
    cap = s.compute_capacity

    improved = True
    while improved:
        improved = False
        load = np.bincount(server, minlength=s.n_servers).astype(np.float64)
        demsum = np.bincount(server, weights=demand, minlength=s.n_servers)
        for i in range(s.n_users):
            cur = server[i]
            load0 = load.copy()
            load0[cur] -= 1.0
            dem0 = demsum.copy()
            dem0[cur] -= demand[i]
            # Compute-latency change if user i joins each server, up to a
            # shared constant, so comparisons between servers are exact.
            extra = ((load0 + 1.0) * (dem0 + demand[i]) - load0 * dem0) / cap
            objective = fixed[i] + extra
            target = int(np.argmin(objective))
            if objective[target] < objective[cur] - _MOVE_EPS:
                server[i] = target
                load[cur] -= 1.0
                load[target] += 1.0
                demsum[cur] -= demand[i]
                demsum[target] += demand[i]
                improved = True
    return Assignment(server)


def greedy_association(s: Scenario, p: ResolutionPlan) -> Assignment:
    """Load-blind assignment: per user, the server with the cheapest transfers."""
    p.validate_for(s)
    fixed = s.uplink_size[:, None] / s.uplink_rate + p.d[:, None] / s.downlink_rate
    return Assignment(np.argmin(fixed, axis=1))


def _enumerate_min(
    fixed: np.ndarray,
    demand: np.ndarray,
    capacity: np.ndarray,
    weight: float,
) -> tuple[np.ndarray, float]:
    """Minimize sum_i fixed[i, a_i] + weight * sum_j load_j * demand_j / cap_j
    over all assignments, in lexicographic order so ties resolve to the
    smallest server vector. Chunked so memory stays flat.
    """
    u, srv = fixed.shape
    total = srv**u
    if total > MAX_ENUMERATION:
        raise CapacityError(
            f"exhaustive enumeration needs {total} assignments, exceeding the "
            f"supported bound of {MAX_ENUMERATION}")
    users = np.arange(u)
    servers = np.arange(srv)
    best_value = np.inf
    best_digits: np.ndarray | None = None
    chunk = 1 << 14
    for start in range(0, total, chunk):
        ks = np.arange(start, min(start + chunk, total))
        digits = np.stack(np.unravel_index(ks, (srv,) * u), axis=1)
        values = fixed[users[None, :], digits].sum(axis=1)
        if weight != 0.0:
            onehot = digits[:, :, None] == servers
            load = onehot.sum(axis=1)
            demsum = np.einsum("bus,u->bs", onehot.astype(np.float64), demand)
            values = values + weight * ((load * demsum) / capacity).sum(axis=1)
        k = int(np.argmin(values))
        if values[k] < best_value:
            best_value = float(values[k])
            best_digits = digits[k].copy()
    assert best_digits is not None
    return best_digits, best_value


def exhaustive_association(s: Scenario, p: ResolutionPlan) -> Assignment:
    """Exact minimum-latency assignment by enumeration (small instances only).

    Raises :class:`CapacityError` when n_servers**n_users exceeds
    ``MAX_ENUMERATION``; ties go to the lexicographically smallest vector.
    """
    p.validate_for(s)
    fixed = s.uplink_size[:, None] / s.uplink_rate + p.d[:, None] / s.downlink_rate
    digits, _ = _enumerate_min(fixed, s.compute_demand, s.compute_capacity, weight=1.0)
    return Assignment(digits)
