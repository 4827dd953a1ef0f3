import datetime as dt

import numpy as np
import pytest

from rdlp.profiles import ProfileSet
from rdlp.synthetic import Archetype, SyntheticSpec, generate_synthetic


def make_set(rows, start=dt.date(2014, 3, 1), household="H1"):
    """ProfileSet from a list of 24-value rows, one day apart."""
    rows = np.asarray(rows, dtype=np.float64)
    ids = tuple(household if isinstance(household, str) else household[i] for i in range(rows.shape[0]))
    dates = tuple(start + dt.timedelta(days=i) for i in range(rows.shape[0]))
    return ProfileSet(ids, dates, rows)


def bell(center, width=3.0, height=1.0):
    """Smooth 24-hour template with a single bump."""
    t = np.arange(24, dtype=np.float64)
    return height * np.exp(-0.5 * ((t - center) / width) ** 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def two_archetype_set():
    """Morning versus evening households, well separated in shape and scale."""
    spec = SyntheticSpec(
        n_households=16,
        days=14,
        archetypes=(
            Archetype("morning", tuple(bell(7, height=2.0) + 0.2), (0.9, 1.1), noise=0.02),
            Archetype("evening", tuple(bell(19, height=12.0) + 1.0), (0.9, 1.1), noise=0.05),
        ),
        rng_seed=5,
    )
    return generate_synthetic(spec), spec
