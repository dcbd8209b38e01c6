import numpy as np
import pytest

from jitterkit import ColumnSchema, DiscretePmf, MixedDataset, NoiseSpec, sample_model

# the (theta, nu) battery exercised throughout: plain uniform noise up to
# the smooth wide-shoulder member
BATTERY = [(t, v) for t in (0.0, 0.4, 0.8) for v in (1, 2, 5)]


@pytest.fixture(params=BATTERY, ids=lambda tv: f"theta{tv[0]}_nu{tv[1]}")
def battery_spec(request) -> NoiseSpec:
    theta, nu = request.param
    return NoiseSpec(theta=theta, nu=nu, dims=1)


@pytest.fixture
def binom43() -> DiscretePmf:
    return DiscretePmf.binomial(4, 0.3)


def discrete_dataset(pmf: DiscretePmf, n: int, seed: int) -> MixedDataset:
    """Sample a one-column discrete dataset from the pmf."""
    from jitterkit import SyntheticMixedModel

    rows = sample_model(SyntheticMixedModel(margin=pmf), n, seed)
    return MixedDataset((ColumnSchema("z", "discrete_ordered"),), rows)


def mixed_dataset(model, n: int, seed: int) -> MixedDataset:
    """Sample a (z, x) dataset from a synthetic mixed model."""
    rows = sample_model(model, n, seed)
    schema = [ColumnSchema("z", "discrete_ordered")]
    if rows.shape[1] == 2:
        schema.append(ColumnSchema("x", "continuous"))
    return MixedDataset(tuple(schema), rows)


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
