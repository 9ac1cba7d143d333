import logging
import time
import traceback
from typing import Optional

from cng.best_response import ResponseCheck, check_profile
from cng.master import cut_violation, solve_master
from cng.models import (
    Cut,
    CutPool,
    EquilibriumResult,
    MasterStatus,
    Owner,
    SolveStatus,
    StrategyProfile,
)
from cng.payoffs import objective_value, validate
from workflow.state import Incumbent, SolverState

logger = logging.getLogger(__name__)


class ZeroRegretsNodes:
    """One method per step of the cutting-plane equilibrium selection loop.

    Each method receives the solver state, updates it, and returns it; errors
    are caught, logged and stored under ``state["error"]`` for the graph to
    route to its end.
    """

    def prepare(self, state: SolverState) -> SolverState:
        """Validate the instance and initialize the loop state.

        Args:
            state: State holding the instance and the solve configuration

        Returns:
            State with an empty cut pool, Phi_UB at its start value and the clock started
        """
        try:
            validate(state["instance"])
            config = state["config"]
            state["started_at"] = time.monotonic()
            state["deadline"] = state["started_at"] + config.time_limit
            state["cut_pool"] = CutPool()
            state["phi_ub"] = config.phi_start
            state["iterations"] = 0
            state["last_optimum"] = None
            state["candidates"] = []
            state["deviation"] = None
            state["incumbent"] = None
            state["completed_nodes"] = ["prepare"]
            logger.info(
                f"Selecting the {config.objective.value}-best equilibrium of a game with "
                f"{state['instance'].n} nodes (time limit {config.time_limit}s)"
            )
        except Exception as e:
            error_msg = f"Error preparing the solve: {str(e)}"
            logger.error(error_msg)
            state["error"] = error_msg
        return state

    def solve_master(self, state: SolverState) -> SolverState:
        """Maximize the objective over the joint outcomes space under the current cut pool."""
        state["iterations"] += 1
        try:
            config = state["config"]
            phi_ub = state["phi_ub"]
            upper_bound: Optional[float] = None
            if state["last_optimum"] is not None and state["last_optimum"][0] == phi_ub:
                upper_bound = state["last_optimum"][1]

            outcome = solve_master(
                state["instance"],
                state["cut_pool"],
                config.objective,
                phi_ub,
                time_limit=max(state["deadline"] - time.monotonic(), 0.0),
                node_limit=config.master_node_limit,
                warm_start=state["candidates"],
                upper_bound=upper_bound,
            )
            state["master_outcome"] = outcome
            if outcome.status == MasterStatus.OPTIMAL:
                state["last_optimum"] = (phi_ub, outcome.value)
            logger.info(
                f"Iteration {state['iterations']}: master {outcome.status.value} at Phi_UB={phi_ub} "
                f"with {len(state['cut_pool'])} cuts ({outcome.nodes} search nodes)"
            )
            state["completed_nodes"].append("solve_master")
        except Exception as e:
            error_msg = f"Error solving the master problem: {str(e)}\n{traceback.format_exc()}"
            logger.error(error_msg)
            state["error"] = error_msg
        return state

    def raise_phi(self, state: SolverState) -> SolverState:
        """No profile satisfies the pool at this slack: relax Phi_UB by one increment."""
        state["phi_ub"] += state["config"].phi_increment
        logger.info(f"Master infeasible, raising Phi_UB to {state['phi_ub']}")
        state["completed_nodes"].append("raise_phi")
        return state

    def check_deviations(self, state: SolverState) -> SolverState:
        """Compute both best responses against the master optimum.

        The defender is checked first; the attacker only when the defender has
        no deviation gaining more than Phi_UB.
        """
        try:
            instance = state["instance"]
            config = state["config"]
            profile = state["master_outcome"].profile
            check = check_profile(instance, profile)
            self._track(state, check)

            threshold = state["phi_ub"] + config.ne_tolerance
            defender_cut = Cut(owner=Owner.DEFENDER, deviation=check.defender_response)
            attacker_cut = Cut(owner=Owner.ATTACKER, deviation=check.attacker_response)
            if check.defender_gain > threshold and defender_cut not in state["cut_pool"]:
                state["deviation"] = {
                    "owner": Owner.DEFENDER,
                    "strategy": check.defender_response,
                    "gain": check.defender_gain,
                }
            elif check.attacker_gain > threshold and attacker_cut not in state["cut_pool"]:
                state["deviation"] = {
                    "owner": Owner.ATTACKER,
                    "strategy": check.attacker_response,
                    "gain": check.attacker_gain,
                }
            else:
                state["deviation"] = None
                state["status"] = SolveStatus.PROVED_OPTIMAL_NE
            state["completed_nodes"].append("check_deviations")
        except Exception as e:
            error_msg = f"Error checking deviations: {str(e)}\n{traceback.format_exc()}"
            logger.error(error_msg)
            state["error"] = error_msg
        return state

    def add_defender_cut(self, state: SolverState) -> SolverState:
        return self._add_cut(state, "add_defender_cut")

    def add_attacker_cut(self, state: SolverState) -> SolverState:
        return self._add_cut(state, "add_attacker_cut")

    def finalize(self, state: SolverState) -> SolverState:
        """Certify the selected profile and assemble the result.

        On a proof the master optimum is returned. Otherwise the incumbent with
        the smallest certified Phi (largest objective on ties) is returned, and
        without any incumbent the unconstrained objective maximizer.
        """
        try:
            instance = state["instance"]
            config = state["config"]
            outcome = state.get("master_outcome")

            if state.get("status") == SolveStatus.PROVED_OPTIMAL_NE:
                profile = outcome.profile
                check = check_profile(instance, profile)
            else:
                state["status"] = SolveStatus.INCUMBENT_ON_LIMIT
                if outcome is not None and outcome.status == MasterStatus.LIMIT and outcome.profile is not None:
                    self._track(state, check_profile(instance, outcome.profile))
                if state["incumbent"] is None:
                    logger.warning("No incumbent before the limit, falling back to the unconstrained optimum")
                    fallback = solve_master(instance, CutPool(), config.objective, 0.0)
                    profile = fallback.profile or StrategyProfile(x=(0,) * instance.n, alpha=(0,) * instance.n)
                else:
                    profile = state["incumbent"]["profile"]
                check = check_profile(instance, profile)

            phi = check.phi
            state["result"] = EquilibriumResult(
                profile=profile,
                phi=phi,
                exact=phi <= config.ne_tolerance,
                defender_value=check.defender_value,
                attacker_value=check.attacker_value,
                objective=config.objective,
                objective_value=objective_value(instance, profile, config.objective),
                iterations=state["iterations"],
                cuts_added=len(state["cut_pool"]),
                phi_ub_final=state["phi_ub"],
                wall_time=time.monotonic() - state["started_at"],
                status=state["status"],
                cut_pool=state["cut_pool"],
            )
            logger.info(
                f"Finished with {state['status'].value}: phi={phi:.6g}, f^d={check.defender_value:.6g}, "
                f"f^a={check.attacker_value:.6g} after {state['iterations']} iterations"
            )
            state["completed_nodes"].append("finalize")
        except Exception as e:
            error_msg = f"Error assembling the result: {str(e)}\n{traceback.format_exc()}"
            logger.error(error_msg)
            state["error"] = error_msg
        return state

    def _add_cut(self, state: SolverState, node_name: str) -> SolverState:
        deviation = state["deviation"]
        cut = Cut(owner=deviation["owner"], deviation=deviation["strategy"])
        state["cut_pool"].add(cut)
        instance = state["instance"]
        phi_ub = state["phi_ub"]
        state["candidates"] = [
            profile for profile in state["candidates"] if cut_violation(instance, cut, profile) <= phi_ub
        ]
        logger.info(
            f"The {deviation['owner'].value} deviates with gain {deviation['gain']:.6g}; "
            f"pool now holds {len(state['cut_pool'])} cuts"
        )
        state["completed_nodes"].append(node_name)
        return state

    def _track(self, state: SolverState, check: ResponseCheck) -> None:
        """Record an examined profile as warm start and as incumbent candidate."""
        profile = check.profile
        seen = set(state["candidates"])
        for candidate in (
            profile,
            profile.with_x(check.defender_response),
            profile.with_alpha(check.attacker_response),
        ):
            if candidate not in seen:
                state["candidates"].append(candidate)
                seen.add(candidate)

        value = objective_value(state["instance"], profile, state["config"].objective)
        incumbent: Optional[Incumbent] = state["incumbent"]
        if incumbent is None or (check.phi, -value) < (incumbent["phi"], -incumbent["objective_value"]):
            state["incumbent"] = {"profile": profile, "phi": check.phi, "objective_value": value}
