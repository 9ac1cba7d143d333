import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Binary = Tuple[int, ...]

FEASIBILITY_TOL = 1e-9

PARAMETER_GRID = {
    "gamma": (0.0, 0.1),
    "eta": (0.6, 0.8),
    "defender_budget_frac": (0.30, 0.75),
    "attacker_budget_frac": (0.03, 0.10, 0.30),
}


def _check_binary(values: Binary) -> Binary:
    for v in values:
        if v not in (0, 1):
            raise ValueError(f"expected a binary vector, found entry {v!r}")
    return values


class Owner(str, Enum):
    DEFENDER = "defender"
    ATTACKER = "attacker"


class MasterObjective(str, Enum):
    """Function f(x, alpha) maximized by the selection problem."""

    DEFENDER_PAYOFF = "defender"
    ATTACKER_PAYOFF = "attacker"
    SOCIAL_WELFARE = "social"


class MasterStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    LIMIT = "LIMIT"


class SolveStatus(str, Enum):
    PROVED_OPTIMAL_NE = "PROVED_OPTIMAL_NE"
    INCUMBENT_ON_LIMIT = "INCUMBENT_ON_LIMIT"


class CngInstance(BaseModel):
    """All parameters of a Critical Node Game.

    Construction only coerces types; call ``cng.payoffs.validate`` to check the
    game invariants (factor ordering, shapes, weights).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int
    p_d: Tuple[float, ...]
    p_a: Tuple[float, ...]
    d: Tuple[float, ...]
    a: Tuple[float, ...]
    D: float
    A: float
    delta: float
    eta: float
    epsilon: float
    gamma: float
    # provenance only, never read by the solver
    edges: Optional[Tuple[Tuple[int, int, float], ...]] = None

    @property
    def total_defender_profit(self) -> float:
        return math.fsum(self.p_d)

    @property
    def total_attacker_profit(self) -> float:
        return math.fsum(self.p_a)


class StrategyProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: Binary
    alpha: Binary

    @field_validator("x", "alpha")
    @classmethod
    def _binary(cls, value: Binary) -> Binary:
        return _check_binary(value)

    def with_x(self, x: Binary) -> "StrategyProfile":
        return StrategyProfile(x=tuple(x), alpha=self.alpha)

    def with_alpha(self, alpha: Binary) -> "StrategyProfile":
        return StrategyProfile(x=self.x, alpha=tuple(alpha))


class PayoffCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    defender_value: float
    attacker_value: float


class KnapsackProblem(BaseModel):
    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...]
    weights: Tuple[float, ...]
    capacity: float


class KnapsackSolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    selected: Binary
    objective: float


class Cut(BaseModel):
    """Equilibrium inequality anchored to a stored deviation.

    Defender cut: f^d(deviation, alpha) <= f^d(x, alpha) + phi.
    Attacker cut: f^a(deviation, x) <= f^a(alpha, x) + phi.
    """

    model_config = ConfigDict(frozen=True)

    owner: Owner
    deviation: Binary

    @field_validator("deviation")
    @classmethod
    def _binary(cls, value: Binary) -> Binary:
        return _check_binary(value)


class CutPool(BaseModel):
    cuts: List[Cut] = Field(default_factory=list)

    def add(self, cut: Cut) -> bool:
        """Append a cut unless an identical one is already stored.

        Returns:
            True if the pool grew
        """
        if cut in self.cuts:
            return False
        self.cuts.append(cut)
        return True

    def __len__(self) -> int:
        return len(self.cuts)

    def __contains__(self, cut: Cut) -> bool:
        return cut in self.cuts


class MasterOutcome(BaseModel):
    status: MasterStatus
    profile: Optional[StrategyProfile] = None
    value: Optional[float] = None
    nodes: int = 0


class SolveConfig(BaseModel):
    objective: MasterObjective = MasterObjective.DEFENDER_PAYOFF
    time_limit: float = Field(100.0, gt=0)
    max_iterations: int = Field(10_000, gt=0)
    phi_start: float = Field(0.0, ge=0)
    phi_increment: float = Field(1.0, gt=0)
    ne_tolerance: float = Field(1e-6, ge=0)
    master_node_limit: Optional[int] = Field(None, gt=0)


class EquilibriumResult(BaseModel):
    profile: StrategyProfile
    phi: float
    exact: bool
    defender_value: float
    attacker_value: float
    objective: MasterObjective
    objective_value: float
    iterations: int
    cuts_added: int
    phi_ub_final: float
    wall_time: float
    status: SolveStatus
    cut_pool: CutPool = Field(default_factory=CutPool, exclude=True)

    @property
    def phi_relative(self) -> float:
        """Certified phi as a share of the defender's payoff."""
        if self.defender_value == 0:
            return math.inf if self.phi > 0 else 0.0
        return self.phi / abs(self.defender_value)

    def to_record(self) -> Dict[str, Any]:
        """Result file layout written by ``cng solve``."""
        return {
            "x": list(self.profile.x),
            "alpha": list(self.profile.alpha),
            "phi": self.phi,
            "exact": self.exact,
            "defender_payoff": self.defender_value,
            "attacker_payoff": self.attacker_value,
            "objective": self.objective.value,
            "objective_value": self.objective_value,
            "iterations": self.iterations,
            "cuts": self.cuts_added,
            "phi_ub": self.phi_ub_final,
            "wall_time_s": self.wall_time,
            "status": self.status.value,
        }


class PriceResult(BaseModel):
    """Price of Security or Price of Aggression together with its two ingredients."""

    metric: Literal["pos", "poa"]
    value: float
    numerator: float
    denominator: float
    best_outcome: StrategyProfile
    best_ne: EquilibriumResult

    @property
    def phi(self) -> float:
        return self.best_ne.phi

    def to_record(self) -> Dict[str, Any]:
        return {
            "metric": self.metric,
            "value": self.value,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "phi": self.phi,
            "exact": self.best_ne.exact,
            "best_outcome": {
                "x": list(self.best_outcome.x),
                "alpha": list(self.best_outcome.alpha),
            },
            "equilibrium": self.best_ne.to_record(),
        }


class GenSpec(BaseModel):
    """Parameters of one synthetic instance."""

    n: int = Field(ge=1)
    gamma: float = 0.0
    eta: float = 0.6
    defender_budget_frac: float = 0.30
    attacker_budget_frac: float = 0.10
    seed: int = Field(0, ge=0, lt=2**64)
    mode: Literal["grid", "custom"] = "grid"

    @model_validator(mode="after")
    def _check_grid(self) -> "GenSpec":
        if self.mode == "grid":
            for name, allowed in PARAMETER_GRID.items():
                value = getattr(self, name)
                if not any(math.isclose(value, v, abs_tol=1e-12) for v in allowed):
                    raise ValueError(f"{name}={value} is not on the parameter grid {allowed}")
        return self


class SnapshotNode(BaseModel):
    name: str
    role: str = "service"


class TrafficSnapshot(BaseModel):
    nodes: List[SnapshotNode]
    edges: List[Tuple[Union[int, str], Union[int, str], float]] = Field(default_factory=list)
