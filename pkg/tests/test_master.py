import numpy as np
import pytest

from cng.master import MasterSolver, cut_table, cut_violation, satisfies_cuts, solve_master
from cng.models import Cut, CutPool, MasterObjective, MasterStatus, Owner, StrategyProfile
from cng.oracle import best_profile, enumerate_feasible
from cng.payoffs import CELLS, is_feasible
from conftest import random_instance

OBJECTIVES = list(MasterObjective)


def test_unconstrained_defender_optimum(example1):
    outcome = solve_master(example1, CutPool(), MasterObjective.DEFENDER_PAYOFF, 0.0)
    assert outcome.status == MasterStatus.OPTIMAL
    assert outcome.value == pytest.approx(52.0, abs=1e-9)


def test_unconstrained_attacker_optimum_matches_enumeration(two_node):
    # protecting node 1 costs the attacker nothing, so x=(0,0) and x=(0,1) tie
    outcome = solve_master(two_node, CutPool(), MasterObjective.ATTACKER_PAYOFF, 0.0)
    assert outcome.value == pytest.approx(10.0)
    assert outcome.profile.alpha == (1, 0)
    assert outcome.profile.x in {(0, 0), (0, 1)}


def test_cut_excludes_deviating_profile(two_node):
    # from (x=0, alpha=(1,0)) the defender gains 3 by protecting node 0
    cuts = CutPool(cuts=[Cut(owner=Owner.DEFENDER, deviation=(1, 0))])
    profile = StrategyProfile(x=(0, 0), alpha=(1, 0))
    assert cut_violation(two_node, cuts.cuts[0], profile) == pytest.approx(3.0)
    assert not satisfies_cuts(two_node, cuts, profile, 0.0)
    assert satisfies_cuts(two_node, cuts, profile, 3.0)


def test_cut_table_reproduces_violation(example1):
    cut = Cut(owner=Owner.ATTACKER, deviation=(0, 1, 1, 1, 1))
    table = cut_table(example1, cut)
    profile = StrategyProfile(x=(1, 1, 1, 0, 1), alpha=(0, 0, 1, 0, 1))
    cells = [CELLS.index((profile.x[i], profile.alpha[i])) for i in range(5)]
    total = sum(table[i, c] for i, c in enumerate(cells))
    assert -total == pytest.approx(cut_violation(example1, cut, profile), abs=1e-9)


def test_full_pool_leaves_only_the_equilibrium(two_node):
    # cuts for every feasible deviation of both players keep exactly the pure equilibria
    pool = CutPool()
    for owner in Owner:
        for deviation in ((0, 0), (0, 1), (1, 0)):
            pool.add(Cut(owner=owner, deviation=deviation))
    outcome = solve_master(two_node, pool, MasterObjective.DEFENDER_PAYOFF, 0.0)
    assert outcome.status == MasterStatus.OPTIMAL
    assert outcome.profile == StrategyProfile(x=(1, 0), alpha=(1, 0))
    assert outcome.value == pytest.approx(6.0)


def test_warm_start_and_upper_bound(example1):
    seed = StrategyProfile(x=(0,) * 5, alpha=(0,) * 5)
    outcome = solve_master(
        example1, CutPool(), MasterObjective.DEFENDER_PAYOFF, 0.0, warm_start=[seed], upper_bound=52.0
    )
    assert outcome.status == MasterStatus.OPTIMAL
    assert outcome.profile == seed
    assert outcome.nodes == 0


def test_spent_time_limit_returns_incumbent_or_nothing(example1):
    outcome = solve_master(example1, CutPool(), MasterObjective.SOCIAL_WELFARE, 0.0, time_limit=0.0)
    assert outcome.status == MasterStatus.LIMIT
    assert outcome.profile is None

    seed = StrategyProfile(x=(1, 1, 1, 0, 1), alpha=(0, 0, 1, 0, 1))
    outcome = solve_master(
        example1, CutPool(), MasterObjective.SOCIAL_WELFARE, 0.0, time_limit=0.0, warm_start=[seed]
    )
    assert outcome.status == MasterStatus.LIMIT
    assert outcome.profile == seed
    assert is_feasible(example1, outcome.profile)


def test_excluded_assignment_yields_next_best(two_node):
    solver = MasterSolver(two_node, CutPool(), MasterObjective.DEFENDER_PAYOFF, 0.0)
    first = solver.solve()
    cells = np.array([CELLS.index((first.profile.x[i], first.profile.alpha[i])) for i in range(2)])
    solver._exclude(cells)
    second = solver.solve()
    assert second.status == MasterStatus.OPTIMAL
    assert second.profile != first.profile
    assert second.value <= first.value + 1e-9


def test_larger_slack_never_lowers_the_optimum():
    rng = np.random.default_rng(11)
    for case in range(30):
        instance = random_instance(3000 + case, n_low=3, n_high=7)
        pool = _random_pool(instance, rng)
        objective = OBJECTIVES[case % len(OBJECTIVES)]
        previous = -np.inf
        for phi_ub in (0.0, 1.0, 5.0, 50.0):
            outcome = solve_master(instance, pool, objective, phi_ub)
            value = outcome.value if outcome.status == MasterStatus.OPTIMAL else -np.inf
            assert value >= previous - 1e-9
            previous = value


def test_adding_a_cut_never_raises_the_optimum():
    rng = np.random.default_rng(12)
    for case in range(30):
        instance = random_instance(4000 + case, n_low=3, n_high=7)
        pool = _random_pool(instance, rng)
        objective = OBJECTIVES[case % len(OBJECTIVES)]
        phi_ub = float(rng.uniform(0, 5))
        before = solve_master(instance, pool, objective, phi_ub)

        extra = _random_pool(instance, rng)
        grown = CutPool(cuts=list(pool.cuts))
        for cut in extra.cuts:
            grown.add(cut)
        after = solve_master(instance, grown, objective, phi_ub)
        if before.status == MasterStatus.INFEASIBLE:
            assert after.status == MasterStatus.INFEASIBLE
        elif after.status == MasterStatus.OPTIMAL:
            assert after.value <= before.value + 1e-9


def _random_pool(instance, rng) -> CutPool:
    xs = enumerate_feasible(instance.d, instance.D, instance.n)
    alphas = enumerate_feasible(instance.a, instance.A, instance.n)
    pool = CutPool()
    for _ in range(int(rng.integers(0, 6))):
        if rng.random() < 0.5:
            pool.add(Cut(owner=Owner.DEFENDER, deviation=xs[int(rng.integers(len(xs)))]))
        else:
            pool.add(Cut(owner=Owner.ATTACKER, deviation=alphas[int(rng.integers(len(alphas)))]))
    return pool


@pytest.mark.slow
def test_matches_brute_force_on_random_pools():
    rng = np.random.default_rng(7)
    for case in range(200):
        instance = random_instance(1000 + case, n_low=2, n_high=8)
        pool = _random_pool(instance, rng)
        phi_ub = float(rng.choice([0.0, rng.uniform(0, 10)]))
        objective = OBJECTIVES[case % len(OBJECTIVES)]

        outcome = solve_master(instance, pool, objective, phi_ub)
        expected = best_profile(instance, objective, pool, phi_ub)
        if expected is None:
            assert outcome.status == MasterStatus.INFEASIBLE
            continue
        assert outcome.status == MasterStatus.OPTIMAL
        assert outcome.value == pytest.approx(expected[1], abs=1e-9)
        assert is_feasible(instance, outcome.profile)
        assert satisfies_cuts(instance, pool, outcome.profile, phi_ub)
