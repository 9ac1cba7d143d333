"""Validation and exact payoff evaluation for the Critical Node Game.

Every node contributes one of four cells to each player's payoff, selected by
the pair (x_i, alpha_i):

    x_i alpha_i   defender        attacker
    0   0         p^d_i           -gamma p^a_i      normal operations
    0   1         delta p^d_i     p^a_i             successful attack
    1   1         eta p^d_i       (1-eta) p^a_i     mitigated attack
    1   0         epsilon p^d_i   0                 mitigation without attack

The payoff functions are total: they are defined on infeasible profiles too.
"""
import logging
import math
from typing import Sequence, Tuple

import numpy as np

from cng.errors import ErrorCode, InstanceError
from cng.models import FEASIBILITY_TOL, CngInstance, MasterObjective, PayoffCell, StrategyProfile

logger = logging.getLogger(__name__)

# column order of every (n, 4) cell table
CELLS: Tuple[Tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


def cell_index(x_i: int, alpha_i: int) -> int:
    return 2 * x_i + alpha_i


def validate(instance: CngInstance) -> None:
    """Check every CngInstance invariant.

    Args:
        instance: Game parameters to check

    Raises:
        InstanceError: With the code of the first violated invariant
    """
    n = instance.n
    if n < 1:
        raise InstanceError(ErrorCode.SHAPE_MISMATCH, f"n must be positive, got {n}")
    for name in ("p_d", "p_a", "d", "a"):
        vector = getattr(instance, name)
        if len(vector) != n:
            raise InstanceError(
                ErrorCode.SHAPE_MISMATCH, f"{name} has length {len(vector)}, expected {n}"
            )
        if not all(math.isfinite(v) for v in vector):
            raise InstanceError(ErrorCode.RANGE_VIOLATION, f"{name} has non-finite entries")
    for name in ("d", "a"):
        if min(getattr(instance, name)) <= 0:
            raise InstanceError(ErrorCode.NONPOSITIVE_WEIGHT, f"weights {name} must be strictly positive")
    for name in ("p_d", "p_a"):
        if min(getattr(instance, name)) < 0:
            raise InstanceError(ErrorCode.NEGATIVE_VALUE, f"profits {name} must be nonnegative")
    for name in ("D", "A"):
        budget = getattr(instance, name)
        if not math.isfinite(budget) or budget < 0:
            raise InstanceError(ErrorCode.NEGATIVE_VALUE, f"budget {name}={budget} must be nonnegative")
    for name in ("delta", "eta", "epsilon", "gamma"):
        value = getattr(instance, name)
        if not (0.0 <= value <= 1.0):
            raise InstanceError(ErrorCode.RANGE_VIOLATION, f"{name}={value} is outside [0, 1]")
    if not (instance.delta < instance.eta < instance.epsilon):
        raise InstanceError(
            ErrorCode.ORDERING_VIOLATION,
            f"expected delta < eta < epsilon, got {instance.delta}, {instance.eta}, {instance.epsilon}",
        )
    if instance.edges is not None:
        for u, v, traffic in instance.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InstanceError(ErrorCode.INDEX_OUT_OF_RANGE, f"edge ({u}, {v}) references a missing node")
            if traffic < 0:
                raise InstanceError(ErrorCode.NEGATIVE_VALUE, f"edge ({u}, {v}) has negative traffic")


def defender_cells(instance: CngInstance) -> np.ndarray:
    """Defender contribution of every node under every cell, shape (n, 4)."""
    p = np.asarray(instance.p_d, dtype=float)
    return np.column_stack((p, instance.delta * p, instance.epsilon * p, instance.eta * p))


def attacker_cells(instance: CngInstance) -> np.ndarray:
    """Attacker contribution of every node under every cell, shape (n, 4)."""
    p = np.asarray(instance.p_a, dtype=float)
    return np.column_stack((-instance.gamma * p, p, np.zeros_like(p), (1.0 - instance.eta) * p))


def objective_cells(instance: CngInstance, objective: MasterObjective) -> np.ndarray:
    if objective == MasterObjective.DEFENDER_PAYOFF:
        return defender_cells(instance)
    if objective == MasterObjective.ATTACKER_PAYOFF:
        return attacker_cells(instance)
    return defender_cells(instance) + attacker_cells(instance)


def evaluate_cell(instance: CngInstance, i: int, x_i: int, alpha_i: int) -> PayoffCell:
    """Contribution of node ``i`` to both payoffs under the decisions (x_i, alpha_i)."""
    if not (0 <= i < instance.n):
        raise InstanceError(ErrorCode.INDEX_OUT_OF_RANGE, f"node {i} is outside [0, {instance.n})")
    if x_i not in (0, 1) or alpha_i not in (0, 1):
        raise InstanceError(ErrorCode.RANGE_VIOLATION, f"decisions must be bits, got ({x_i}, {alpha_i})")
    p_d = instance.p_d[i]
    p_a = instance.p_a[i]
    if x_i == 0 and alpha_i == 0:
        return PayoffCell(defender_value=p_d, attacker_value=-instance.gamma * p_a)
    if x_i == 0:
        return PayoffCell(defender_value=instance.delta * p_d, attacker_value=p_a)
    if alpha_i == 1:
        return PayoffCell(defender_value=instance.eta * p_d, attacker_value=(1.0 - instance.eta) * p_a)
    return PayoffCell(defender_value=instance.epsilon * p_d, attacker_value=0.0)


def _profile_arrays(instance: CngInstance, profile: StrategyProfile) -> Tuple[np.ndarray, np.ndarray]:
    if len(profile.x) != instance.n or len(profile.alpha) != instance.n:
        raise InstanceError(
            ErrorCode.SHAPE_MISMATCH,
            f"profile of lengths ({len(profile.x)}, {len(profile.alpha)}) does not match n={instance.n}",
        )
    return np.asarray(profile.x, dtype=float), np.asarray(profile.alpha, dtype=float)


def defender_payoff(instance: CngInstance, profile: StrategyProfile) -> float:
    """f^d(x, alpha)."""
    x, alpha = _profile_arrays(instance, profile)
    p = np.asarray(instance.p_d, dtype=float)
    weights = (
        (1 - x) * (1 - alpha)
        + instance.eta * x * alpha
        + instance.epsilon * x * (1 - alpha)
        + instance.delta * (1 - x) * alpha
    )
    return float(np.dot(p, weights))


def attacker_payoff(instance: CngInstance, profile: StrategyProfile) -> float:
    """f^a(alpha, x)."""
    x, alpha = _profile_arrays(instance, profile)
    p = np.asarray(instance.p_a, dtype=float)
    weights = -instance.gamma * (1 - x) * (1 - alpha) + (1 - x) * alpha + (1.0 - instance.eta) * x * alpha
    return float(np.dot(p, weights))


def objective_value(instance: CngInstance, profile: StrategyProfile, objective: MasterObjective) -> float:
    if objective == MasterObjective.DEFENDER_PAYOFF:
        return defender_payoff(instance, profile)
    if objective == MasterObjective.ATTACKER_PAYOFF:
        return attacker_payoff(instance, profile)
    return defender_payoff(instance, profile) + attacker_payoff(instance, profile)


def fits_budget(weights: Sequence[float], decisions: Sequence[int], budget: float) -> bool:
    return float(np.dot(np.asarray(weights, dtype=float), np.asarray(decisions, dtype=float))) <= budget + FEASIBILITY_TOL


def is_feasible(instance: CngInstance, profile: StrategyProfile) -> bool:
    """True iff the profile lies in the joint outcomes space."""
    _profile_arrays(instance, profile)
    return fits_budget(instance.d, profile.x, instance.D) and fits_budget(instance.a, profile.alpha, instance.A)
