from typing import List, Optional, Tuple, TypedDict

from cng.models import (
    Binary,
    CngInstance,
    CutPool,
    EquilibriumResult,
    MasterOutcome,
    Owner,
    SolveConfig,
    SolveStatus,
    StrategyProfile,
)


class Deviation(TypedDict):
    owner: Owner
    strategy: Binary
    gain: float


class Incumbent(TypedDict):
    profile: StrategyProfile
    phi: float
    objective_value: float


class SolverState(TypedDict, total=False):
    # Input data
    instance: CngInstance
    config: SolveConfig

    # Clock
    started_at: float
    deadline: float

    # Cutting-plane loop
    cut_pool: CutPool
    phi_ub: float
    iterations: int
    master_outcome: MasterOutcome
    last_optimum: Optional[Tuple[float, float]]  # (phi_ub, value) of the latest OPTIMAL master
    candidates: List[StrategyProfile]
    deviation: Optional[Deviation]
    incumbent: Optional[Incumbent]

    # Output
    status: SolveStatus
    result: EquilibriumResult

    # Error handling
    error: Optional[str]

    # Workflow control
    completed_nodes: List[str]
