"""Objective evaluation against hand arithmetic and a straight-line oracle."""

import math

import numpy as np
import pytest

from edgeopt import (
    Assignment,
    ResolutionPlan,
    Scenario,
    UtilityParams,
    ValidationError,
    earning,
    evaluate,
    generate_scenario,
    latency,
    per_user_latency,
    with_params,
)


def single_user_scenario(capacity=1e9, omega=2.0):
    return Scenario(
        n_users=1, n_servers=1,
        uplink_rate=[[1.0]], downlink_rate=[[1.0]],
        uplink_size=[1.0], compute_demand=[1.0], compute_capacity=[capacity],
        d_min=1.0, d_max=10.0, utility_params=UtilityParams(omega=omega))


def latency_by_hand(s, a, p):
    # independent reimplementation, plain loops
    out = []
    for i in range(s.n_users):
        j = int(a.server_of[i])
        load = sum(1 for k in range(s.n_users) if int(a.server_of[k]) == j)
        t = s.uplink_size[i] / s.uplink_rate[i, j]
        t += s.compute_demand[i] * load / s.compute_capacity[j]
        t += p.d[i] / s.downlink_rate[i, j]
        out.append(t)
    return np.array(out)


def random_decisions(s, rng):
    a = Assignment(rng.integers(0, s.n_servers, size=s.n_users))
    p = ResolutionPlan(rng.uniform(s.d_min, s.d_max, size=s.n_users))
    return a, p


def test_two_second_round_trip():
    # unit payload each way at unit rates; compute term pushed below 1e-6
    s = single_user_scenario()
    lat = latency(s, Assignment([0]), ResolutionPlan([1.0]), 0)
    assert abs(lat - 2.0) < 1e-6


def test_shared_server_compute_term():
    s = Scenario(
        n_users=2, n_servers=1,
        uplink_rate=[[2.0], [4.0]], downlink_rate=[[10.0], [20.0]],
        uplink_size=[1.0, 1.0], compute_demand=[100.0, 100.0],
        compute_capacity=[1000.0],
        d_min=1.0, d_max=10.0, utility_params=UtilityParams(omega=2.0))
    a, p = Assignment([0, 0]), ResolutionPlan([1.0, 1.0])
    lat = per_user_latency(s, a, p)
    transfer = np.array([1 / 2.0 + 1 / 10.0, 1 / 4.0 + 1 / 20.0])
    # two users share the server: each compute share is 100 * 2 / 1000
    assert np.allclose(lat - transfer, 0.2, atol=1e-12)


def test_latency_matches_straight_line_oracle():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        s = generate_scenario(5, 3, seed)
        a, p = random_decisions(s, rng)
        fast = per_user_latency(s, a, p)
        slow = latency_by_hand(s, a, p)
        assert np.all(np.abs(fast - slow) <= 1e-12 * np.abs(slow))
        assert np.all(fast > 0)


def test_single_index_latency_consistent():
    s = generate_scenario(6, 3, seed=2)
    rng = np.random.default_rng(2)
    a, p = random_decisions(s, rng)
    vec = per_user_latency(s, a, p)
    for i in range(s.n_users):
        assert latency(s, a, p, i) == vec[i]
    with pytest.raises(ValidationError):
        latency(s, a, p, 6)
    with pytest.raises(ValidationError):
        latency(s, a, p, -1)


def test_mismatched_decisions_rejected():
    s = generate_scenario(4, 2, seed=0)
    good_a, good_p = Assignment([0, 1, 0, 1]), ResolutionPlan([2.0] * 4)
    with pytest.raises(ValidationError):
        per_user_latency(s, Assignment([0, 1, 0]), good_p)
    with pytest.raises(ValidationError):
        per_user_latency(s, good_a, ResolutionPlan([2.0] * 3))


def test_earning_reference_points():
    s = single_user_scenario()
    assert earning(s, 0.0) == 0.0
    assert abs(earning(s, 4.0) - math.log(5.0)) < 1e-12
    # scalar in, float out; array in, array out
    assert isinstance(earning(s, 4.0), float)
    arr = earning(s, np.array([0.0, 4.0]))
    assert arr.shape == (2,)
    with pytest.raises(ValidationError):
        earning(s, -0.1)
    with pytest.raises(ValidationError):
        earning(s, np.array([1.0, -2.0]))


def test_earning_scales_with_weights():
    s = generate_scenario(1, 1, seed=0, alpha=3.0, beta=0.5)
    assert abs(earning(s, 2.0) - 3.0 * math.log(2.0)) < 1e-12


def test_earning_monotone():
    s = single_user_scenario()
    rng = np.random.default_rng(0)
    lo = rng.uniform(0.0, 50.0, size=1000)
    hi = lo + rng.uniform(1e-9, 10.0, size=1000)
    assert np.all(earning(s, hi) > earning(s, lo))


def test_earning_concave():
    s = single_user_scenario()
    rng = np.random.default_rng(1)
    d1 = rng.uniform(0.0, 50.0, size=1000)
    d2 = rng.uniform(0.0, 50.0, size=1000)
    lam = rng.uniform(1e-6, 1.0 - 1e-6, size=1000)
    mid = earning(s, lam * d1 + (1 - lam) * d2)
    chord = lam * earning(s, d1) + (1 - lam) * earning(s, d2)
    assert np.all(mid >= chord - 1e-12)


def test_crowding_never_helps_residents():
    # moving any user onto server j cannot decrease the latency of users
    # already on j
    for seed in range(5):
        rng = np.random.default_rng(seed)
        s = generate_scenario(6, 3, seed)
        a, p = random_decisions(s, rng)
        before = per_user_latency(s, a, p)
        for mover in range(s.n_users):
            for j in range(s.n_servers):
                if j == a.server_of[mover]:
                    continue
                moved = np.array(a.server_of)
                moved[mover] = j
                after = per_user_latency(s, Assignment(moved), p)
                residents = (a.server_of == j) & (np.arange(s.n_users) != mover)
                assert np.all(after[residents] >= before[residents] - 1e-12)


def test_heavier_latency_weight_never_helps():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        s = generate_scenario(5, 3, seed)
        a, p = random_decisions(s, rng)
        base = evaluate(s, a, p)
        assert base.total_latency > 0
        worse = evaluate(with_params(s, omega=s.utility_params.omega + 1.5), a, p)
        assert worse.utility < base.utility


def test_metrics_identities():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        s = generate_scenario(7, 3, seed)
        a, p = random_decisions(s, rng)
        m = evaluate(s, a, p)
        assert m.total_latency == np.sum(m.per_user_latency)
        assert m.total_earning == np.sum(m.per_user_earning)
        want = m.total_earning - s.utility_params.omega * m.total_latency
        assert abs(m.utility - want) <= 1e-12 * max(1.0, abs(want))


def test_single_user_utility_value():
    s = single_user_scenario(omega=2.0)
    m = evaluate(s, Assignment([0]), ResolutionPlan([1.0]))
    assert abs(m.total_earning - math.log(2.0)) < 1e-9
    assert abs(m.total_latency - 2.0) < 1e-6
    assert abs(m.utility - (math.log(2.0) - 4.0)) < 1e-5
    assert abs(m.utility - (-3.306853)) < 1e-5


def test_zero_weight_utility_is_earning():
    s = generate_scenario(6, 3, seed=4, omega=0.0)
    rng = np.random.default_rng(4)
    a, p = random_decisions(s, rng)
    m = evaluate(s, a, p)
    assert m.utility == m.total_earning
