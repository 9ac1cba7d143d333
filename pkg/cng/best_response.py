"""Best responses of each player against a fixed opponent strategy.

Given the opponent's decisions both payoffs are node-separable, so a best
response is a 0/1 knapsack over the gain of switching each node's own decision
from 0 to 1.
"""
import logging
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from cng.errors import ErrorCode, InstanceError
from cng.knapsack import solve_knapsack
from cng.models import Binary, CngInstance, KnapsackProblem, StrategyProfile
from cng.payoffs import attacker_payoff, defender_payoff

logger = logging.getLogger(__name__)


def _as_bits(instance: CngInstance, decisions: Sequence[int], name: str) -> np.ndarray:
    if len(decisions) != instance.n:
        raise InstanceError(ErrorCode.SHAPE_MISMATCH, f"{name} has length {len(decisions)}, expected {instance.n}")
    return np.asarray(decisions, dtype=float)


def defender_gains(instance: CngInstance, alpha_fixed: Sequence[int]) -> np.ndarray:
    alpha = _as_bits(instance, alpha_fixed, "alpha")
    p = np.asarray(instance.p_d, dtype=float)
    return np.where(alpha == 1, p * (instance.eta - instance.delta), p * (instance.epsilon - 1.0))


def attacker_gains(instance: CngInstance, x_fixed: Sequence[int]) -> np.ndarray:
    x = _as_bits(instance, x_fixed, "x")
    p = np.asarray(instance.p_a, dtype=float)
    return np.where(x == 1, p * (1.0 - instance.eta), p * (1.0 + instance.gamma))


def defender_best_response(instance: CngInstance, alpha_fixed: Sequence[int]) -> Tuple[Binary, float]:
    """Defender's optimal protection plan against a fixed attack.

    Args:
        instance: Game parameters
        alpha_fixed: Attack decisions held fixed

    Returns:
        The protection vector and the defender payoff it achieves
    """
    alpha = _as_bits(instance, alpha_fixed, "alpha")
    p = np.asarray(instance.p_d, dtype=float)
    base = float(np.dot(p, (1 - alpha) + instance.delta * alpha))
    solution = solve_knapsack(
        KnapsackProblem(
            values=tuple(defender_gains(instance, alpha_fixed).tolist()),
            weights=instance.d,
            capacity=instance.D,
        )
    )
    return solution.selected, base + solution.objective


def attacker_best_response(instance: CngInstance, x_fixed: Sequence[int]) -> Tuple[Binary, float]:
    """Attacker's optimal target set against a fixed protection plan.

    Args:
        instance: Game parameters
        x_fixed: Protection decisions held fixed

    Returns:
        The attack vector and the attacker payoff it achieves
    """
    x = _as_bits(instance, x_fixed, "x")
    p = np.asarray(instance.p_a, dtype=float)
    baseline = -instance.gamma * float(np.dot(p, 1 - x))
    solution = solve_knapsack(
        KnapsackProblem(
            values=tuple(attacker_gains(instance, x_fixed).tolist()),
            weights=instance.a,
            capacity=instance.A,
        )
    )
    return solution.selected, baseline + solution.objective


class ResponseCheck(BaseModel):
    """Both players' best responses evaluated against one profile."""

    model_config = ConfigDict(frozen=True)

    profile: StrategyProfile
    defender_value: float
    attacker_value: float
    defender_response: Binary
    defender_response_value: float
    attacker_response: Binary
    attacker_response_value: float

    @property
    def defender_gain(self) -> float:
        return self.defender_response_value - self.defender_value

    @property
    def attacker_gain(self) -> float:
        return self.attacker_response_value - self.attacker_value

    @property
    def phi(self) -> float:
        """Smallest Phi for which the profile is a Phi-NE."""
        return max(self.defender_gain, self.attacker_gain, 0.0)


def check_profile(instance: CngInstance, profile: StrategyProfile) -> ResponseCheck:
    x_response, x_value = defender_best_response(instance, profile.alpha)
    alpha_response, alpha_value = attacker_best_response(instance, profile.x)
    return ResponseCheck(
        profile=profile,
        defender_value=defender_payoff(instance, profile),
        attacker_value=attacker_payoff(instance, profile),
        defender_response=x_response,
        defender_response_value=x_value,
        attacker_response=alpha_response,
        attacker_response_value=alpha_value,
    )
