import itertools
import logging
from typing import Iterator, Sequence, Tuple

import numpy as np

from cng.models import PARAMETER_GRID, CngInstance, GenSpec
from cng.payoffs import validate

logger = logging.getLogger(__name__)

LOW, HIGH = 1, 25


def factors_from_eta(eta: float) -> Tuple[float, float]:
    """(epsilon, delta) = (1.25 eta, 0.80 eta), rounded to clear binary noise."""
    return round(1.25 * eta, 12), round(0.80 * eta, 12)


class InstanceGenerator:
    """Synthetic Critical Node Game instances.

    Every random vector comes from numpy's PCG64 generator seeded with the
    GenSpec seed, drawn in the fixed order a, d, base, r_a, r_d; the
    same GenSpec always yields the same instance on every platform.
    """

    @staticmethod
    def generate(spec: GenSpec) -> CngInstance:
        """Draw one instance.

        Args:
            spec: Size, factors, budget fractions and seed

        Returns:
            A validated instance
        """
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        n = spec.n
        a = rng.integers(LOW, HIGH + 1, size=n)
        d = rng.integers(LOW, HIGH + 1, size=n)
        base = rng.integers(LOW, HIGH + 1, size=n)
        p_a = base + rng.integers(LOW, HIGH + 1, size=n)
        p_d = base + rng.integers(LOW, HIGH + 1, size=n)
        epsilon, delta = factors_from_eta(spec.eta)

        instance = CngInstance(
            n=n,
            p_d=tuple(float(v) for v in p_d),
            p_a=tuple(float(v) for v in p_a),
            d=tuple(float(v) for v in d),
            a=tuple(float(v) for v in a),
            D=spec.defender_budget_frac * float(d.sum()),
            A=spec.attacker_budget_frac * float(a.sum()),
            delta=delta,
            eta=spec.eta,
            epsilon=epsilon,
            gamma=spec.gamma,
        )
        validate(instance)
        return instance

    @staticmethod
    def grid(sizes: Sequence[int], seed: int) -> Iterator[Tuple[str, GenSpec]]:
        """Every combination of the parameter grid for each size.

        Yields:
            A file name and the GenSpec of one instance, with a per-instance seed
            derived from ``seed``, the size and the combination index
        """
        combos = list(
            itertools.product(
                PARAMETER_GRID["gamma"],
                PARAMETER_GRID["eta"],
                PARAMETER_GRID["defender_budget_frac"],
                PARAMETER_GRID["attacker_budget_frac"],
            )
        )
        for n in sizes:
            for index, (gamma, eta, dfrac, afrac) in enumerate(combos):
                child_seed = int(np.random.SeedSequence([seed, n, index]).generate_state(1, dtype=np.uint64)[0])
                spec = GenSpec(
                    n=n,
                    gamma=gamma,
                    eta=eta,
                    defender_budget_frac=dfrac,
                    attacker_budget_frac=afrac,
                    seed=child_seed,
                )
                name = f"cng_n{n}_g{gamma:.2f}_e{eta:.2f}_D{dfrac:.2f}_A{afrac:.2f}_s{seed}.json"
                yield name, spec
        logger.info(f"Enumerated {len(combos) * len(sizes)} grid instances for sizes {list(sizes)}")
