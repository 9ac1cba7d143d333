"""Price of Security and Price of Aggression.

Both prices compare a player's best payoff over the whole joint outcomes space
with the payoff that player gets at its own most favorable equilibrium found
by the cutting-plane solver. When the solver certifies only a Phi-NE, the price
is computed at that Phi level, which ``PriceResult.phi`` reports.
"""
import logging
import math
from typing import Optional

from cng.errors import ErrorCode
from cng.master import solve_master
from cng.models import CngInstance, CutPool, MasterObjective, PriceResult, SolveConfig
from cng.payoffs import validate
from workflow.graph import solve

logger = logging.getLogger(__name__)


def price_ratio(numerator: float, denominator: float) -> float:
    """numerator / denominator, or the +inf sentinel when the denominator is not positive.

    Equal numerator and denominator always give exactly 1.
    """
    if math.isclose(numerator, denominator, rel_tol=1e-12, abs_tol=1e-12):
        return 1.0
    if denominator <= 0:
        logger.warning(
            f"{ErrorCode.DIVISION_BY_ZERO.value}: equilibrium payoff {denominator} is not positive; "
            f"reporting an infinite price"
        )
        return math.inf
    return numerator / denominator


def _price(instance: CngInstance, config: Optional[SolveConfig], objective: MasterObjective) -> PriceResult:
    validate(instance)
    config = (config or SolveConfig()).model_copy(update={"objective": objective})
    best = solve_master(instance, CutPool(), objective, 0.0)
    best_ne = solve(instance, config)
    if objective == MasterObjective.DEFENDER_PAYOFF:
        denominator = best_ne.defender_value
    else:
        denominator = best_ne.attacker_value
    value = price_ratio(best.value, denominator)
    metric = "pos" if objective == MasterObjective.DEFENDER_PAYOFF else "poa"
    logger.info(f"{metric.upper()} = {best.value:.6g} / {denominator:.6g} = {value:.4f} at phi={best_ne.phi:.6g}")
    return PriceResult(
        metric=metric,
        value=value,
        numerator=best.value,
        denominator=denominator,
        best_outcome=best.profile,
        best_ne=best_ne,
    )


def price_of_security(instance: CngInstance, config: Optional[SolveConfig] = None) -> PriceResult:
    """Best defender payoff over the joint outcomes space over the defender-best equilibrium payoff."""
    return _price(instance, config, MasterObjective.DEFENDER_PAYOFF)


def price_of_aggression(instance: CngInstance, config: Optional[SolveConfig] = None) -> PriceResult:
    """Best attacker payoff over the joint outcomes space over the attacker-best equilibrium payoff."""
    return _price(instance, config, MasterObjective.ATTACKER_PAYOFF)


def format_price(value: float) -> str:
    """Two-decimal rendering used by human-readable reports."""
    if math.isinf(value):
        return "inf"
    return f"{value:.2f}"
