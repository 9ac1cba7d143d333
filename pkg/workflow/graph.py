import logging
import time
from typing import Optional

from langgraph.graph import END, StateGraph

from cng.errors import CngError, ErrorCode
from cng.models import CngInstance, EquilibriumResult, MasterStatus, Owner, SolveConfig
from cng.payoffs import validate
from workflow.nodes import ZeroRegretsNodes
from workflow.state import SolverState

logger = logging.getLogger(__name__)

# graph steps per cutting-plane iteration: solve_master, check_deviations, add_*_cut
_STEPS_PER_ITERATION = 3


class ZeroRegretsWorkflow:
    """Cutting-plane selection of the objective-best (Phi-)equilibrium.

    The loop alternates a master problem over the joint outcomes space with
    best-response separation: a profitable deviation becomes an equilibrium
    inequality, an infeasible master raises Phi_UB, and a master optimum that
    no player can improve on is returned.
    """

    def __init__(self):
        self.nodes = ZeroRegretsNodes()
        self.workflow = self._build_workflow()

    def _build_workflow(self):
        """Build the workflow graph.

        Returns:
            The compiled graph
        """
        workflow = StateGraph(SolverState)

        workflow.add_node("prepare", self.nodes.prepare)
        workflow.add_node("solve_master", self.nodes.solve_master)
        workflow.add_node("raise_phi", self.nodes.raise_phi)
        workflow.add_node("check_deviations", self.nodes.check_deviations)
        workflow.add_node("add_defender_cut", self.nodes.add_defender_cut)
        workflow.add_node("add_attacker_cut", self.nodes.add_attacker_cut)
        workflow.add_node("finalize", self.nodes.finalize)

        workflow.set_entry_point("prepare")
        workflow.add_edge("finalize", END)

        workflow.add_conditional_edges(
            "prepare",
            self._check_error,
            {
                "continue": "solve_master",
                "error": END
            }
        )

        workflow.add_conditional_edges(
            "solve_master",
            self._route_master,
            {
                "optimal": "check_deviations",
                "infeasible": "raise_phi",
                "limit": "finalize",
                "error": END
            }
        )

        workflow.add_conditional_edges(
            "check_deviations",
            self._route_deviation,
            {
                "defender_deviates": "add_defender_cut",
                "attacker_deviates": "add_attacker_cut",
                "equilibrium": "finalize",
                "error": END
            }
        )

        for node in ("raise_phi", "add_defender_cut", "add_attacker_cut"):
            workflow.add_conditional_edges(
                node,
                self._check_limits,
                {
                    "continue": "solve_master",
                    "limit": "finalize"
                }
            )

        return workflow.compile()

    def _check_error(self, state: SolverState) -> str:
        if "error" in state and state["error"]:
            return "error"
        return "continue"

    def _route_master(self, state: SolverState) -> str:
        if "error" in state and state["error"]:
            return "error"
        status = state["master_outcome"].status
        if status == MasterStatus.OPTIMAL:
            return "optimal"
        if status == MasterStatus.INFEASIBLE:
            return "infeasible"
        return "limit"

    def _route_deviation(self, state: SolverState) -> str:
        if "error" in state and state["error"]:
            return "error"
        deviation = state["deviation"]
        if deviation is None:
            return "equilibrium"
        if deviation["owner"] == Owner.DEFENDER:
            return "defender_deviates"
        return "attacker_deviates"

    def _check_limits(self, state: SolverState) -> str:
        """Stop the loop once the iteration budget or the time limit is spent."""
        if state["iterations"] >= state["config"].max_iterations:
            logger.info(f"Iteration limit {state['config'].max_iterations} reached")
            return "limit"
        if time.monotonic() >= state["deadline"]:
            logger.info("Time limit reached")
            return "limit"
        return "continue"

    def run(self, instance: CngInstance, config: Optional[SolveConfig] = None) -> SolverState:
        """Run the workflow.

        Args:
            instance: Game to solve
            config: Objective and limits; defaults to the defender's payoff

        Returns:
            Final state, holding ``result`` on success or ``error`` otherwise
        """
        config = config or SolveConfig()
        state: SolverState = {
            "instance": instance,
            "config": config,
            "completed_nodes": []
        }

        try:
            final_state = self.workflow.invoke(
                state,
                config={"recursion_limit": _STEPS_PER_ITERATION * config.max_iterations + 10},
            )
            return final_state
        except Exception as e:
            logger.error(f"Error running the equilibrium workflow: {str(e)}")
            state["error"] = f"Workflow execution error: {str(e)}"
            return state

    def solve(self, instance: CngInstance, config: Optional[SolveConfig] = None) -> EquilibriumResult:
        validate(instance)
        final_state = self.run(instance, config)
        if final_state.get("error") or "result" not in final_state:
            raise CngError(ErrorCode.INVALID_INSTANCE, final_state.get("error") or "no result produced")
        return final_state["result"]


_default_workflow: Optional[ZeroRegretsWorkflow] = None


def solve(instance: CngInstance, config: Optional[SolveConfig] = None) -> EquilibriumResult:
    """Select the equilibrium maximizing ``config.objective`` (see ZeroRegretsWorkflow)."""
    global _default_workflow
    if _default_workflow is None:
        _default_workflow = ZeroRegretsWorkflow()
    return _default_workflow.solve(instance, config)
