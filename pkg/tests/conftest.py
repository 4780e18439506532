import pathlib

import numpy as np
import pytest

from tracebounds import Dataset, load_csv

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def toy_path() -> pathlib.Path:
    return FIXTURES / "toy.csv"


@pytest.fixture
def toy(toy_path) -> Dataset:
    return load_csv(toy_path)


def make_random_dataset(rng, n_lo=8, n_hi=60, weighted=False, p_treat_react=0.7, p_ctrl_react=0.3):
    """Random two-arm dataset with m observed everywhere.

    Reaction rates default to a monotone configuration so that the
    empirical shares are usually consistent with monotone reaction,
    which keeps rejection loops in the callers short. Returns None
    when the draw leaves an arm empty; callers just skip those.
    """
    n = int(rng.integers(n_lo, n_hi))
    d = rng.integers(0, 2, n)
    if d.sum() in (0, n):
        return None
    m = np.where(d == 1, rng.random(n) < p_treat_react, rng.random(n) < p_ctrl_react).astype(float)
    y = np.round(rng.normal(0.0, 2.0, n), 3)
    w = rng.choice([0.5, 1.0, 1.5, 2.0], n) if weighted else None
    return Dataset(y=y, d=d, m=m, weight=w)
