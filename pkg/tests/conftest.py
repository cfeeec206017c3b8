import numpy as np
import pytest

from qteam import SymPrior, OccupationMeasure

# Shared seeded generators live in qteam.verify; tests reuse them so the
# CLI verify suite and pytest exercise the same input distributions.
from qteam.verify import (  # noqa: F401  (re-exported for test modules)
    random_chi,
    random_prior,
    random_strategy,
    random_sym_prior,
)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)


@pytest.fixture
def sym08() -> SymPrior:
    return SymPrior.from_lambda(0.8)


def random_occupation(rng: np.random.Generator) -> OccupationMeasure:
    """Random strictly positive conditional table, normalised per cell."""
    q = rng.random((2, 2, 2, 2)) + 0.01
    q /= q.sum(axis=(0, 1), keepdims=True)
    return OccupationMeasure(q)


def random_superstructure_instance(rng: np.random.Generator):
    """Random instance with arbitrary 0/1 matrices from the superstructure."""
    from qteam import TeamInstance

    return TeamInstance(M=rng.integers(0, 2, size=(2, 2)),
                        N=rng.integers(0, 2, size=(2, 2)),
                        prior=random_prior(rng),
                        chi=random_chi(rng))
