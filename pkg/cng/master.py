"""Exact solver of the selection problem over the joint outcomes space.

The problem maximizes a node-separable objective f(x, alpha) subject to both
budget constraints and the equilibrium inequalities of a cut pool, with the
slack Phi fixed to its upper bound (Phi carries no objective coefficient, so
its upper bound is the most permissive choice).

Every cut is node-separable too. For a defender cut with deviation x~,

    f^d(x~, alpha) <= f^d(x, alpha) + Phi
    <=>  sum_i [cell^d_i(x_i, alpha_i) - cell^d_i(x~_i, alpha_i)] + Phi >= 0

and symmetrically for attacker cuts, so each node contributes one of four
known constants to every cut. The master is therefore a 0/1 program over one
indicator z[i, c] per node and cell c = (x_i, alpha_i), with exactly one cell
per node. This is the product linearization z_i = x_i * alpha_i written out
cell by cell, and its LP relaxation is the convex hull of each node's cells.
"""
import logging
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from cng.models import (
    FEASIBILITY_TOL,
    CngInstance,
    Cut,
    CutPool,
    MasterObjective,
    MasterOutcome,
    MasterStatus,
    Owner,
    StrategyProfile,
)
from cng.payoffs import (
    CELLS,
    attacker_cells,
    attacker_payoff,
    cell_index,
    defender_cells,
    defender_payoff,
    is_feasible,
    objective_cells,
    objective_value,
)

logger = logging.getLogger(__name__)

CUT_TOL = 1e-9
BOUND_TOL = 1e-9

# HiGHS status codes returned by scipy.optimize.milp
_MILP_OPTIMAL = 0
_MILP_LIMIT = 1
_MILP_INFEASIBLE = 2

_X_OF_CELL = np.array([x for x, _ in CELLS], dtype=float)
_ALPHA_OF_CELL = np.array([alpha for _, alpha in CELLS], dtype=float)


def cut_violation(instance: CngInstance, cut: Cut, profile: StrategyProfile) -> float:
    """Left side minus right side of a cut at Phi = 0; positive means the deviation gains."""
    if cut.owner == Owner.DEFENDER:
        deviated = StrategyProfile(x=cut.deviation, alpha=profile.alpha)
        return defender_payoff(instance, deviated) - defender_payoff(instance, profile)
    deviated = StrategyProfile(x=profile.x, alpha=cut.deviation)
    return attacker_payoff(instance, deviated) - attacker_payoff(instance, profile)


def satisfies_cuts(instance: CngInstance, cuts: CutPool, profile: StrategyProfile, phi_ub: float) -> bool:
    return all(cut_violation(instance, cut, profile) <= phi_ub + CUT_TOL for cut in cuts.cuts)


def cut_table(instance: CngInstance, cut: Cut) -> np.ndarray:
    """Per-node, per-cell contribution g_i(cell) of a cut written as sum_i g_i + Phi >= 0."""
    rows = np.arange(instance.n)
    deviation = np.asarray(cut.deviation, dtype=int)
    cells = defender_cells(instance) if cut.owner == Owner.DEFENDER else attacker_cells(instance)
    table = np.empty_like(cells)
    for c, (x_c, alpha_c) in enumerate(CELLS):
        if cut.owner == Owner.DEFENDER:
            anchor = cells[rows, 2 * deviation + alpha_c]
        else:
            anchor = cells[rows, 2 * x_c + deviation]
        table[:, c] = cells[:, c] - anchor
    return table


class MasterSolver:
    """Cell-assignment 0/1 program solved with HiGHS through ``scipy.optimize.milp``.

    The indicator of cell c at node i sits at column 4 * i + c. A solution is
    rounded, mapped back to a profile and re-checked in exact arithmetic
    against both budgets and every cut at tolerance ``CUT_TOL``; a profile that
    only passed within the engine's own tolerances is excluded by a no-good
    row and the program is solved again.
    """

    def __init__(
        self,
        instance: CngInstance,
        cuts: CutPool,
        objective: MasterObjective,
        phi_ub: float,
        time_limit: Optional[float] = None,
        node_limit: Optional[int] = None,
    ):
        self.instance = instance
        self.cuts = cuts
        self.objective = objective
        self.phi_ub = phi_ub
        self.time_limit = time_limit
        self.node_limit = node_limit
        self.nodes = 0

        n = instance.n
        self._cost = -objective_cells(instance, objective).ravel()
        if len(cuts):
            self._cut_tables = np.stack([cut_table(instance, cut) for cut in cuts.cuts])
        else:
            self._cut_tables = np.zeros((0, n, 4))
        self._constraints = self._base_constraints()
        self._no_goods: List[np.ndarray] = []

    def _base_constraints(self) -> List[LinearConstraint]:
        instance = self.instance
        n = instance.n
        constraints = [
            LinearConstraint(np.kron(np.eye(n), np.ones(4)), 1.0, 1.0),
            LinearConstraint(
                np.vstack(
                    [
                        np.kron(np.asarray(instance.d, dtype=float), _X_OF_CELL),
                        np.kron(np.asarray(instance.a, dtype=float), _ALPHA_OF_CELL),
                    ]
                ),
                -np.inf,
                [instance.D + FEASIBILITY_TOL, instance.A + FEASIBILITY_TOL],
            ),
        ]
        if len(self.cuts):
            rows = self._cut_tables.reshape(len(self.cuts), 4 * n)
            constraints.append(LinearConstraint(rows, -self.phi_ub - CUT_TOL, np.inf))
        return constraints

    def _within_cuts(self, profile: StrategyProfile) -> bool:
        if not len(self.cuts):
            return True
        cells = [cell_index(profile.x[i], profile.alpha[i]) for i in range(self.instance.n)]
        sums = self._cut_tables[:, np.arange(self.instance.n), cells].sum(axis=1)
        return bool(np.all(sums + self.phi_ub >= -CUT_TOL))

    def _admissible(self, profile: StrategyProfile) -> bool:
        return is_feasible(self.instance, profile) and self._within_cuts(profile)

    def _seed(self, warm_start: Sequence[StrategyProfile]) -> Tuple[float, Optional[StrategyProfile]]:
        best_value, best_profile = -np.inf, None
        for profile in warm_start:
            if not self._admissible(profile):
                continue
            value = objective_value(self.instance, profile, self.objective)
            if value > best_value:
                best_value, best_profile = value, profile
        return best_value, best_profile

    @staticmethod
    def _to_profile(cells: np.ndarray) -> StrategyProfile:
        return StrategyProfile(
            x=tuple(int(CELLS[c][0]) for c in cells),
            alpha=tuple(int(CELLS[c][1]) for c in cells),
        )

    def _exclude(self, cells: np.ndarray) -> None:
        n = self.instance.n
        row = np.zeros(4 * n)
        row[4 * np.arange(n) + cells] = 1.0
        self._no_goods.append(row)

    def _run_milp(self, time_left: Optional[float]):
        constraints = list(self._constraints)
        if self._no_goods:
            constraints.append(LinearConstraint(np.vstack(self._no_goods), -np.inf, self.instance.n - 1))
        options = {"disp": False, "mip_rel_gap": 0.0}
        if time_left is not None:
            options["time_limit"] = time_left
        if self.node_limit is not None:
            options["node_limit"] = self.node_limit
        size = 4 * self.instance.n
        return milp(
            c=self._cost,
            constraints=constraints,
            integrality=np.ones(size),
            bounds=Bounds(np.zeros(size), np.ones(size)),
            options=options,
        )

    def solve(
        self,
        warm_start: Sequence[StrategyProfile] = (),
        upper_bound: Optional[float] = None,
    ) -> MasterOutcome:
        """Run the search.

        Args:
            warm_start: Profiles whose best cut-satisfying member seeds the incumbent
            upper_bound: Known bound on the optimum; a seed meeting it is returned unsolved

        Returns:
            OPTIMAL with the maximizer, INFEASIBLE, or LIMIT with the incumbent if any
        """
        started = time.monotonic()
        deadline = None if self.time_limit is None else started + self.time_limit
        seed_value, seed_profile = self._seed(warm_start)

        if upper_bound is not None and seed_profile is not None and seed_value >= upper_bound - BOUND_TOL:
            logger.debug(f"Warm start meets the known bound {upper_bound}, skipping the master search")
            return self._outcome(MasterStatus.OPTIMAL, seed_profile)

        while True:
            time_left = None if deadline is None else deadline - time.monotonic()
            if time_left is not None and time_left <= 0:
                return self._outcome(MasterStatus.LIMIT, seed_profile)

            result = self._run_milp(time_left)
            self.nodes += int(getattr(result, "mip_node_count", 0) or 0)

            if result.status == _MILP_INFEASIBLE:
                # a seed is admissible, so the engine cannot have proved emptiness
                if seed_profile is not None:
                    return self._outcome(MasterStatus.OPTIMAL, seed_profile)
                return self._outcome(MasterStatus.INFEASIBLE, None)
            if result.x is None:
                if result.status not in (_MILP_OPTIMAL, _MILP_LIMIT):
                    logger.warning(f"Master engine stopped without a solution: {result.message}")
                return self._outcome(MasterStatus.LIMIT, seed_profile)

            cells = np.round(result.x).reshape(self.instance.n, 4).argmax(axis=1)
            profile = self._to_profile(cells)
            if not self._admissible(profile):
                logger.debug("Master solution violates a cut or budget in exact arithmetic, excluding it")
                self._exclude(cells)
                continue

            status = MasterStatus.OPTIMAL if result.status == _MILP_OPTIMAL else MasterStatus.LIMIT
            if seed_profile is not None and seed_value > objective_value(self.instance, profile, self.objective):
                profile = seed_profile
            logger.debug(
                f"Master over {self.instance.n} nodes and {len(self.cuts)} cuts: {status.value} "
                f"after {self.nodes} nodes in {time.monotonic() - started:.3f}s"
            )
            return self._outcome(status, profile)

    def _outcome(self, status: MasterStatus, profile: Optional[StrategyProfile]) -> MasterOutcome:
        if profile is None:
            return MasterOutcome(status=status, nodes=self.nodes)
        return MasterOutcome(
            status=status,
            profile=profile,
            value=objective_value(self.instance, profile, self.objective),
            nodes=self.nodes,
        )


def solve_master(
    instance: CngInstance,
    cuts: CutPool,
    objective: MasterObjective,
    phi_ub: float,
    time_limit: Optional[float] = None,
    node_limit: Optional[int] = None,
    warm_start: Sequence[StrategyProfile] = (),
    upper_bound: Optional[float] = None,
) -> MasterOutcome:
    """Maximize ``objective`` over the joint outcomes space restricted by ``cuts`` at slack ``phi_ub``."""
    solver = MasterSolver(instance, cuts, objective, phi_ub, time_limit=time_limit, node_limit=node_limit)
    return solver.solve(warm_start=warm_start, upper_bound=upper_bound)
