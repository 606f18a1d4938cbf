"""Closed-form data sizes against a one-dimensional grid-search oracle."""

import numpy as np
import pytest

from edgeopt import (
    Assignment,
    ResolutionPlan,
    Scenario,
    UtilityParams,
    ValidationError,
    evaluate,
    generate_scenario,
    optimal_data_sizes,
    unconstrained_optimum,
    with_params,
)


def scenario_with_rate(rate, omega, d_min=1.0, d_max=10.0):
    return Scenario(
        n_users=1, n_servers=1,
        uplink_rate=[[1.0]], downlink_rate=[[rate]],
        uplink_size=[1.0], compute_demand=[1.0], compute_capacity=[1e9],
        d_min=d_min, d_max=d_max, utility_params=UtilityParams(omega=omega))


def grid_argmax(s, rate, step=1e-4):
    """Brute-force maximizer of earning(d) - omega * d / rate over the box."""
    up = s.utility_params
    count = int(round((s.d_max - s.d_min) / step)) + 1
    grid = np.linspace(s.d_min, s.d_max, count)
    vals = up.alpha * np.log1p(up.beta * grid) - up.omega * grid / rate
    k = int(np.argmax(vals))
    return float(grid[k]), float(vals[k])


def assigned_rates(s, a):
    return s.downlink_rate[np.arange(s.n_users), a.server_of]


def test_interior_optimum_matches_grid():
    s = scenario_with_rate(10.0, omega=2.0)
    plan = optimal_data_sizes(s, Assignment([0]))
    assert abs(plan.d[0] - 4.0) < 1e-12
    d_grid, _ = grid_argmax(s, 10.0)
    assert abs(plan.d[0] - d_grid) <= 1e-3


def test_clamped_at_lower_bound():
    s = scenario_with_rate(1.0, omega=10.0)
    plan = optimal_data_sizes(s, Assignment([0]))
    assert plan.d[0] == 1.0
    assert unconstrained_optimum(1.0, 1.0, 10.0, 1.0) == pytest.approx(-0.9)


def test_clamped_at_upper_bound():
    s = scenario_with_rate(10.0, omega=0.5)  # unconstrained 19 > 10
    plan = optimal_data_sizes(s, Assignment([0]))
    assert plan.d[0] == 10.0


def test_zero_weight_takes_maximum():
    s = generate_scenario(8, 3, seed=0, omega=0.0)
    plan = optimal_data_sizes(s, Assignment(np.zeros(8, dtype=int)))
    assert np.all(plan.d == s.d_max)


def test_first_order_condition_when_interior():
    for seed in range(20):
        s = generate_scenario(10, 4, seed)
        rng = np.random.default_rng(seed)
        a = Assignment(rng.integers(0, 4, size=10))
        plan = optimal_data_sizes(s, a)
        up = s.utility_params
        rates = assigned_rates(s, a)
        interior = (plan.d > s.d_min + 1e-9) & (plan.d < s.d_max - 1e-9)
        marginal = up.alpha * up.beta / (1.0 + up.beta * plan.d) - up.omega / rates
        assert np.all(np.abs(marginal[interior]) < 1e-9)


def test_beats_grid_on_hundred_instances():
    checked = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        omega = float(rng.uniform(0.5, 6.0))
        s = generate_scenario(6, 3, seed, omega=omega)
        a = Assignment(rng.integers(0, 3, size=6))
        plan = optimal_data_sizes(s, a)
        rates = assigned_rates(s, a)
        up = s.utility_params
        closed_obj = 0.0
        grid_obj = 0.0
        for i in range(s.n_users):
            d_grid, v_grid = grid_argmax(s, float(rates[i]))
            assert abs(plan.d[i] - d_grid) <= 1e-3
            closed_obj += up.alpha * np.log1p(up.beta * plan.d[i]) \
                - omega * plan.d[i] / rates[i]
            grid_obj += v_grid
            checked += 1
        assert closed_obj >= grid_obj - 1e-6
    assert checked == 600


def test_plan_maximizes_utility_for_fixed_assignment():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        s = generate_scenario(7, 3, seed)
        a = Assignment(rng.integers(0, 3, size=7))
        best = evaluate(s, a, optimal_data_sizes(s, a)).utility
        for _ in range(50):
            other = ResolutionPlan(rng.uniform(s.d_min, s.d_max, size=7))
            assert best >= evaluate(s, a, other).utility - 1e-9


def test_heavier_weight_shrinks_sizes():
    s = generate_scenario(12, 4, seed=5)
    rng = np.random.default_rng(5)
    a = Assignment(rng.integers(0, 4, size=12))
    d_light = optimal_data_sizes(s, a).d
    d_heavy = optimal_data_sizes(with_params(s, omega=5.0), a).d
    assert np.all(d_heavy <= d_light + 1e-12)
    assert np.any(d_heavy < d_light)


def test_per_user_separability():
    s = generate_scenario(6, 3, seed=8)
    a = Assignment([0, 1, 2, 0, 1, 2])
    before = optimal_data_sizes(s, a).d
    down = np.array(s.downlink_rate)
    down[2] = [11.0, 13.0, 17.0]
    altered = Scenario(
        n_users=6, n_servers=3,
        uplink_rate=s.uplink_rate, downlink_rate=down,
        uplink_size=s.uplink_size, compute_demand=s.compute_demand,
        compute_capacity=s.compute_capacity,
        d_min=s.d_min, d_max=s.d_max, utility_params=s.utility_params)
    after = optimal_data_sizes(altered, a).d
    keep = np.arange(6) != 2
    assert np.array_equal(after[keep], before[keep])
    assert after[2] != before[2]


def test_plan_respects_bounds_and_validates():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        omega = float(rng.uniform(0.0, 12.0))
        s = generate_scenario(9, 3, seed, omega=omega, d_min=2.0, d_max=6.0)
        a = Assignment(rng.integers(0, 3, size=9))
        plan = optimal_data_sizes(s, a)
        plan.validate_for(s)
        assert np.all((plan.d >= 2.0) & (plan.d <= 6.0))
    with pytest.raises(ValidationError):
        optimal_data_sizes(generate_scenario(3, 2, seed=0), Assignment([0, 1]))
