import itertools

import numpy as np
import pytest

from cng.best_response import (
    attacker_best_response,
    attacker_gains,
    check_profile,
    defender_best_response,
    defender_gains,
)
from cng.errors import CngError, ErrorCode
from cng.models import StrategyProfile
from cng.payoffs import attacker_payoff, defender_payoff, fits_budget
from conftest import random_instance


def test_defender_response_to_example_attack(example1):
    x, value = defender_best_response(example1, (0, 0, 1, 0, 1))
    assert value == pytest.approx(29.2, abs=1e-9)
    # epsilon = 1: protecting an unattacked node gains nothing, so only attacked nodes are chosen
    assert x == (0, 0, 1, 0, 1)


def test_attacker_response_to_example_defense(example1):
    alpha, value = attacker_best_response(example1, (1, 1, 1, 0, 1))
    assert alpha == (0, 1, 1, 1, 1)
    assert value == pytest.approx(27.6, abs=1e-9)


def test_check_profile_reports_attacker_gain(example1):
    check = check_profile(example1, StrategyProfile(x=(1, 1, 1, 0, 1), alpha=(0, 0, 1, 0, 1)))
    assert check.defender_gain == pytest.approx(0.0, abs=1e-9)
    assert check.attacker_gain == pytest.approx(27.6 - 13.74, abs=1e-9)
    assert check.phi == pytest.approx(13.86, abs=1e-9)


def test_gain_signs(example1):
    gains = defender_gains(example1, (1, 0, 0, 0, 0))
    assert gains[0] == pytest.approx(9 * (0.4 - 0.06))
    assert gains[1] == pytest.approx(0.0)


def test_response_rejects_wrong_length(example1):
    with pytest.raises(CngError) as exc:
        attacker_best_response(example1, (1, 1))
    assert exc.value.code == ErrorCode.SHAPE_MISMATCH


def test_two_node_responses(two_node):
    x, value = defender_best_response(two_node, (1, 0))
    assert x == (1, 0)
    assert value == pytest.approx(6.0)
    alpha, value = attacker_best_response(two_node, (0, 0))
    assert alpha == (1, 0)
    assert value == pytest.approx(10.0)


@pytest.mark.parametrize("seed", range(25))
def test_responses_match_enumeration(seed):
    instance = random_instance(seed, n_low=3, n_high=8)
    rng = np.random.default_rng(seed)
    n = instance.n
    opponent_x = tuple(int(v) for v in rng.integers(0, 2, size=n))
    opponent_alpha = tuple(int(v) for v in rng.integers(0, 2, size=n))

    x, x_value = defender_best_response(instance, opponent_alpha)
    alpha, alpha_value = attacker_best_response(instance, opponent_x)
    assert fits_budget(instance.d, x, instance.D)
    assert fits_budget(instance.a, alpha, instance.A)

    best_x = max(
        defender_payoff(instance, StrategyProfile(x=s, alpha=opponent_alpha))
        for s in itertools.product((0, 1), repeat=n)
        if fits_budget(instance.d, s, instance.D)
    )
    best_alpha = max(
        attacker_payoff(instance, StrategyProfile(x=opponent_x, alpha=s))
        for s in itertools.product((0, 1), repeat=n)
        if fits_budget(instance.a, s, instance.A)
    )
    assert x_value == pytest.approx(best_x, abs=1e-9)
    assert alpha_value == pytest.approx(best_alpha, abs=1e-9)
    assert defender_payoff(instance, StrategyProfile(x=x, alpha=opponent_alpha)) == pytest.approx(x_value, abs=1e-9)


def test_defender_leaves_unattacked_nodes_alone_when_protection_costs():
    checked = 0
    for seed in range(60):
        instance = random_instance(7000 + seed, n_low=3, n_high=10)
        if instance.epsilon >= 1:
            continue
        rng = np.random.default_rng(seed)
        alpha = tuple(int(v) for v in rng.integers(0, 2, size=instance.n))
        x, _ = defender_best_response(instance, alpha)
        assert all(x[i] == 0 for i in range(instance.n) if alpha[i] == 0)
        checked += 1
    assert checked > 0


@pytest.mark.parametrize("seed", range(25))
def test_attacker_response_leaves_no_room_for_a_gaining_node(seed):
    instance = random_instance(8000 + seed, n_low=3, n_high=10)
    rng = np.random.default_rng(seed)
    x = tuple(int(v) for v in rng.integers(0, 2, size=instance.n))
    gains = attacker_gains(instance, x)
    assert np.all(gains >= 0)

    alpha, _ = attacker_best_response(instance, x)
    residual = instance.A - float(np.dot(instance.a, alpha))
    for i in range(instance.n):
        if alpha[i] == 0 and gains[i] > 0:
            assert instance.a[i] > residual - 1e-9
