import json
import logging

from dotenv import load_dotenv

load_dotenv()

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def main():
    """Walk through the bundled five-node example."""
    from cng.best_response import check_profile
    from cng.metrics import format_price, price_of_security
    from cng.models import MasterObjective, SolveConfig, StrategyProfile
    from cng.oracle import all_exact_ne
    from utils.instance_io import InstanceStore, write_record
    from workflow.graph import ZeroRegretsWorkflow

    instance = InstanceStore.load("data/example1.json")

    profile = StrategyProfile(x=(1, 1, 1, 0, 1), alpha=(0, 0, 1, 0, 1))
    check = check_profile(instance, profile)
    logger.info(f"f^d = {check.defender_value:.6g}, f^a = {check.attacker_value:.6g}")
    logger.info(
        f"Defender best response {check.defender_response} gains {check.defender_gain:.6g}; "
        f"attacker best response {check.attacker_response} gains {check.attacker_gain:.6g}"
    )

    equilibria = all_exact_ne(instance)
    logger.info(f"Enumeration finds {len(equilibria)} pure equilibria")
    for ne in equilibria:
        logger.info(f"  x={ne.x} alpha={ne.alpha}")

    workflow = ZeroRegretsWorkflow()
    result = workflow.solve(instance, SolveConfig(objective=MasterObjective.DEFENDER_PAYOFF, time_limit=30))
    logger.info(f"Defender-best equilibrium: x={result.profile.x} alpha={result.profile.alpha}")
    logger.info(f"Status {result.status.value}, phi={result.phi:.6g}, f^d={result.defender_value:.6g}")

    price = price_of_security(instance, SolveConfig(time_limit=30))
    logger.info(f"PoS = {format_price(price.value)} ({price.numerator:.6g} / {price.denominator:.6g})")

    write_record(result.to_record(), "output/example1_result.json")
    logger.info("Detailed results saved to output/example1_result.json")
    print(json.dumps(result.to_record(), indent=2))


if __name__ == "__main__":
    main()
