import itertools

import numpy as np
import pytest

from cng.errors import CngError, ErrorCode
from cng.knapsack import KnapsackBranchAndBound, solve_knapsack
from cng.models import KnapsackProblem


def brute_force(values, weights, capacity):
    n = len(values)
    grid = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float).reshape(-1, n)
    feasible = grid @ np.asarray(weights, dtype=float) <= capacity + 1e-9
    return float((grid[feasible] @ np.asarray(values, dtype=float)).max())


def test_attacker_response_example():
    solution = solve_knapsack(
        KnapsackProblem(values=(3.6, 6.3, 10.8, 7.56, 4.5), weights=(6, 4, 7, 9, 1), capacity=25.5)
    )
    assert solution.selected == (0, 1, 1, 1, 1)
    assert solution.objective == pytest.approx(29.16, abs=1e-9)


def test_empty_problem():
    solution = solve_knapsack(KnapsackProblem(values=(), weights=(), capacity=3))
    assert solution.selected == ()
    assert solution.objective == 0.0


def test_nonpositive_values_are_never_selected():
    solution = solve_knapsack(KnapsackProblem(values=(-2.0, 0.0, 5.0), weights=(1, 1, 1), capacity=3))
    assert solution.selected == (0, 0, 1)
    assert solution.objective == 5.0


def test_oversized_items_are_skipped():
    solution = solve_knapsack(KnapsackProblem(values=(100.0, 1.0), weights=(10, 1), capacity=5))
    assert solution.selected == (0, 1)
    assert solution.objective == 1.0


def test_zero_capacity():
    solution = solve_knapsack(KnapsackProblem(values=(1.0, 2.0), weights=(1, 1), capacity=0))
    assert solution.selected == (0, 0)


def test_bound_is_dantzig_relaxation():
    solver = KnapsackBranchAndBound([6.0, 4.0], [3.0, 4.0], 5.0)
    # item 0 whole (ratio 2), then half of item 1
    assert solver.bound(0, 0.0, 0.0) == pytest.approx(8.0)


@pytest.mark.parametrize(
    "problem, code",
    [
        (KnapsackProblem(values=(1.0,), weights=(1.0, 2.0), capacity=1), ErrorCode.SHAPE_MISMATCH),
        (KnapsackProblem(values=(1.0, 1.0), weights=(1.0, 0.0), capacity=1), ErrorCode.NONPOSITIVE_WEIGHT),
        (KnapsackProblem(values=(1.0,), weights=(1.0,), capacity=-1), ErrorCode.NEGATIVE_VALUE),
    ],
)
def test_invalid_problems(problem, code):
    with pytest.raises(CngError) as exc:
        solve_knapsack(problem)
    assert exc.value.code == code


def greedy_value(values, weights, capacity):
    order = sorted(range(len(values)), key=lambda i: -values[i] / weights[i])
    room, total = capacity, 0.0
    for i in order:
        if values[i] > 0 and weights[i] <= room:
            room -= weights[i]
            total += values[i]
    return total


def random_problem(rng):
    n = int(rng.integers(1, 13))
    weights = rng.integers(1, 26, size=n).astype(float)
    values = rng.integers(-5, 40, size=n).astype(float)
    capacity = float(rng.uniform(0, weights.sum()))
    return values, weights, capacity


def test_optimum_dominates_greedy():
    rng = np.random.default_rng(31)
    for _ in range(200):
        values, weights, capacity = random_problem(rng)
        solution = solve_knapsack(KnapsackProblem(values=tuple(values), weights=tuple(weights), capacity=capacity))
        assert solution.objective >= greedy_value(values, weights, capacity) - 1e-9


def test_scaling_values_scales_the_optimum():
    rng = np.random.default_rng(32)
    for _ in range(100):
        values, weights, capacity = random_problem(rng)
        factor = float(rng.uniform(0.1, 10.0))
        base = solve_knapsack(KnapsackProblem(values=tuple(values), weights=tuple(weights), capacity=capacity))
        scaled = solve_knapsack(
            KnapsackProblem(values=tuple(values * factor), weights=tuple(weights), capacity=capacity)
        )
        assert scaled.objective == pytest.approx(factor * base.objective, rel=1e-9, abs=1e-9)
        # the scaled maximizer is also a maximizer of the original problem
        assert float(np.dot(scaled.selected, values)) == pytest.approx(base.objective, abs=1e-9)


@pytest.mark.slow
def test_matches_enumeration_on_random_problems():
    rng = np.random.default_rng(20240501)
    for _ in range(1000):
        n = int(rng.integers(1, 17))
        weights = rng.integers(1, 26, size=n).astype(float)
        if rng.random() < 0.5:
            values = rng.integers(-5, 40, size=n).astype(float)
        else:
            values = np.round(rng.uniform(-5, 40, size=n), 3)
        capacity = float(rng.uniform(0, weights.sum()))
        solution = solve_knapsack(
            KnapsackProblem(values=tuple(values), weights=tuple(weights), capacity=capacity)
        )
        assert solution.objective == pytest.approx(brute_force(values, weights, capacity), abs=1e-9)
        assert float(np.dot(solution.selected, weights)) <= capacity + 1e-9
        assert float(np.dot(solution.selected, values)) == pytest.approx(solution.objective, abs=1e-9)
