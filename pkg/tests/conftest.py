from pathlib import Path

import numpy as np
import pytest

from cng.models import PARAMETER_GRID, CngInstance, GenSpec
from utils.instance_generator import InstanceGenerator
from utils.instance_io import InstanceStore

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def example1() -> CngInstance:
    return InstanceStore.load(DATA_DIR / "example1.json")


@pytest.fixture
def two_node() -> CngInstance:
    return InstanceStore.load(DATA_DIR / "two_node.json")


def random_instance(seed: int, n_low: int = 4, n_high: int = 10) -> CngInstance:
    """Instance with a random size and a random parameter-grid combination."""
    rng = np.random.default_rng(seed)
    spec = GenSpec(
        n=int(rng.integers(n_low, n_high + 1)),
        gamma=float(rng.choice(PARAMETER_GRID["gamma"])),
        eta=float(rng.choice(PARAMETER_GRID["eta"])),
        defender_budget_frac=float(rng.choice(PARAMETER_GRID["defender_budget_frac"])),
        attacker_budget_frac=float(rng.choice(PARAMETER_GRID["attacker_budget_frac"])),
        seed=seed,
    )
    return InstanceGenerator.generate(spec)


def make_instance(**overrides) -> CngInstance:
    params = dict(
        n=3,
        p_d=(4.0, 6.0, 2.0),
        p_a=(5.0, 3.0, 2.0),
        d=(1.0, 2.0, 1.0),
        a=(1.0, 1.0, 2.0),
        D=2.0,
        A=2.0,
        delta=0.2,
        eta=0.5,
        epsilon=0.8,
        gamma=0.1,
    )
    params.update(overrides)
    return CngInstance(**params)
