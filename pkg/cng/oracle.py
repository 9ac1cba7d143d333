"""Brute-force ground truth for small games.

Everything here enumerates strategies explicitly and never calls the knapsack
engine, so it can adjudicate the exact solvers independently.
"""
import itertools
import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cng.errors import ErrorCode, InstanceError, SizeLimitError
from cng.models import (
    FEASIBILITY_TOL,
    Binary,
    CngInstance,
    CutPool,
    MasterObjective,
    Owner,
    StrategyProfile,
)
from cng.payoffs import attacker_payoff, defender_payoff

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 14
DEFAULT_NE_CAP = 10
NE_TOL = 1e-9


@lru_cache(maxsize=32)
def _binary_grid(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8).reshape(-1, n)


def _feasible_grid(weights: Sequence[float], capacity: float, n: int, max_n: int) -> np.ndarray:
    if n > max_n:
        raise SizeLimitError(n, max_n)
    if len(weights) != n:
        raise InstanceError(ErrorCode.SHAPE_MISMATCH, f"{len(weights)} weights for n={n}")
    grid = _binary_grid(n)
    mask = grid @ np.asarray(weights, dtype=float) <= capacity + FEASIBILITY_TOL
    return grid[mask]


def enumerate_feasible(
    weights: Sequence[float], capacity: float, n: int, max_n: int = DEFAULT_ENUMERATION_CAP
) -> List[Binary]:
    """All binary vectors within the budget, in lexicographic order."""
    return [tuple(int(v) for v in row) for row in _feasible_grid(weights, capacity, n, max_n)]


class PayoffTables:
    """Both payoffs over every pair of feasible defender and attacker strategies.

    Rows index defender strategies and columns attacker strategies, each in
    lexicographic order. The payoffs are bilinear in (x, alpha):

        f^d = sum p^d + x.(p^d (eps-1)) + alpha.(p^d (delta-1)) + sum p^d x alpha (1+eta-eps-delta)
        f^a = -gamma sum p^a + x.(gamma p^a) + alpha.((1+gamma) p^a) - sum p^a x alpha (gamma+eta)
    """

    def __init__(self, instance: CngInstance, max_n: int = DEFAULT_ENUMERATION_CAP):
        self.instance = instance
        self.defender_strategies = _feasible_grid(instance.d, instance.D, instance.n, max_n).astype(float)
        self.attacker_strategies = _feasible_grid(instance.a, instance.A, instance.n, max_n).astype(float)
        self.defender = self.defender_values(self.defender_strategies, self.attacker_strategies)
        self.attacker = self.attacker_values(self.defender_strategies, self.attacker_strategies)

    def defender_values(self, xs: np.ndarray, alphas: np.ndarray) -> np.ndarray:
        inst = self.instance
        p = np.asarray(inst.p_d, dtype=float)
        return (
            p.sum()
            + (xs @ (p * (inst.epsilon - 1.0)))[:, None]
            + (alphas @ (p * (inst.delta - 1.0)))[None, :]
            + (xs * (p * (1.0 + inst.eta - inst.epsilon - inst.delta))) @ alphas.T
        )

    def attacker_values(self, xs: np.ndarray, alphas: np.ndarray) -> np.ndarray:
        inst = self.instance
        q = np.asarray(inst.p_a, dtype=float)
        return (
            -inst.gamma * q.sum()
            + (xs @ (inst.gamma * q))[:, None]
            + (alphas @ ((1.0 + inst.gamma) * q))[None, :]
            - (xs * (q * (inst.gamma + inst.eta))) @ alphas.T
        )

    def profile(self, row: int, col: int) -> StrategyProfile:
        return StrategyProfile(
            x=tuple(int(v) for v in self.defender_strategies[row]),
            alpha=tuple(int(v) for v in self.attacker_strategies[col]),
        )

    def objective(self, objective: MasterObjective) -> np.ndarray:
        if objective == MasterObjective.DEFENDER_PAYOFF:
            return self.defender
        if objective == MasterObjective.ATTACKER_PAYOFF:
            return self.attacker
        return self.defender + self.attacker

    def cut_mask(self, cuts: CutPool, phi_ub: float) -> np.ndarray:
        """Profiles satisfying every cut at slack ``phi_ub``."""
        mask = np.ones(self.defender.shape, dtype=bool)
        for cut in cuts.cuts:
            deviation = np.asarray(cut.deviation, dtype=float)[None, :]
            if cut.owner == Owner.DEFENDER:
                lhs = self.defender_values(deviation, self.attacker_strategies)  # (1, |A|)
                mask &= lhs <= self.defender + phi_ub + NE_TOL
            else:
                lhs = self.attacker_values(self.defender_strategies, deviation)  # (|X|, 1)
                mask &= lhs <= self.attacker + phi_ub + NE_TOL
        return mask

    def phi_grid(self) -> np.ndarray:
        """Smallest Phi making each profile a Phi-NE."""
        defender_gap = self.defender.max(axis=0)[None, :] - self.defender
        attacker_gap = self.attacker.max(axis=1)[:, None] - self.attacker
        return np.maximum(np.maximum(defender_gap, attacker_gap), 0.0)


def min_phi(instance: CngInstance, profile: StrategyProfile, max_n: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Smallest Phi for which ``profile`` is a Phi-NE, by enumerating both players' deviations."""
    if len(profile.x) != instance.n or len(profile.alpha) != instance.n:
        raise InstanceError(ErrorCode.SHAPE_MISMATCH, "profile does not match the instance size")
    xs = _feasible_grid(instance.d, instance.D, instance.n, max_n).astype(float)
    alphas = _feasible_grid(instance.a, instance.A, instance.n, max_n).astype(float)
    best_defender = max(
        defender_payoff(instance, StrategyProfile(x=tuple(int(v) for v in row), alpha=profile.alpha)) for row in xs
    )
    best_attacker = max(
        attacker_payoff(instance, StrategyProfile(x=profile.x, alpha=tuple(int(v) for v in row))) for row in alphas
    )
    return max(
        0.0,
        best_defender - defender_payoff(instance, profile),
        best_attacker - attacker_payoff(instance, profile),
    )


def all_exact_ne(instance: CngInstance, max_n: int = DEFAULT_NE_CAP) -> List[StrategyProfile]:
    """Every pure Nash equilibrium, defender strategy major, both in lexicographic order.

    An empty list is a legitimate answer: pure equilibria need not exist.
    """
    if instance.n > max_n:
        raise SizeLimitError(instance.n, max_n)
    tables = PayoffTables(instance, max_n=max_n)
    rows, cols = np.nonzero(tables.phi_grid() <= NE_TOL)
    logger.debug(f"Oracle found {len(rows)} exact equilibria over {tables.defender.size} profiles")
    return [tables.profile(r, c) for r, c in zip(rows, cols)]


def best_exact_ne(
    instance: CngInstance, objective: MasterObjective, max_n: int = DEFAULT_NE_CAP
) -> Optional[Tuple[StrategyProfile, float]]:
    """Equilibrium maximizing ``objective`` (first in enumeration order on ties), or None."""
    if instance.n > max_n:
        raise SizeLimitError(instance.n, max_n)
    tables = PayoffTables(instance, max_n=max_n)
    values = np.where(tables.phi_grid() <= NE_TOL, tables.objective(objective), -np.inf)
    flat = int(np.argmax(values))
    row, col = np.unravel_index(flat, values.shape)
    if values[row, col] == -np.inf:
        return None
    return tables.profile(row, col), float(values[row, col])


def best_profile(
    instance: CngInstance,
    objective: MasterObjective,
    cuts: Optional[CutPool] = None,
    phi_ub: float = 0.0,
    max_n: int = DEFAULT_ENUMERATION_CAP,
) -> Optional[Tuple[StrategyProfile, float]]:
    """Exhaustive maximizer of ``objective`` over the cut-satisfying joint outcomes space, or None."""
    tables = PayoffTables(instance, max_n=max_n)
    values = tables.objective(objective)
    if cuts is not None and len(cuts):
        values = np.where(tables.cut_mask(cuts, phi_ub), values, -np.inf)
    row, col = np.unravel_index(int(np.argmax(values)), values.shape)
    if values[row, col] == -np.inf:
        return None
    return tables.profile(row, col), float(values[row, col])
