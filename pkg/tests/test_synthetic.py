import numpy as np
import pytest

from rdlp.errors import ConfigError
from rdlp.synthetic import Archetype, SyntheticSpec, assign_archetypes, generate_synthetic

FLAT = tuple([1.0] * 24)


def test_deterministic_for_seed():
    spec = SyntheticSpec(5, 4, (Archetype("a", FLAT, (0.5, 1.5), 0.3),), rng_seed=42)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    assert a.household_ids == b.household_ids
    assert np.array_equal(a.values, b.values)


def test_count_arithmetic():
    spec = SyntheticSpec(
        10, 30, (Archetype("a", FLAT), Archetype("b", tuple([2.0] * 24))), rng_seed=1
    )
    pset = generate_synthetic(spec)
    assert len(pset) == 300


def test_degenerate_noise_reproduces_template():
    template = tuple(float(3 + (t % 5)) for t in range(24))
    spec = SyntheticSpec(3, 6, (Archetype("a", template, (1.0, 1.0), 0.0),), rng_seed=9)
    pset = generate_synthetic(spec)
    assert np.allclose(pset.values, np.asarray(template)[None, :])


def test_values_clamped_non_negative():
    spec = SyntheticSpec(4, 20, (Archetype("a", tuple([0.01] * 24), (1, 1), 5.0),), rng_seed=3)
    pset = generate_synthetic(spec)
    assert pset.values.min() >= 0.0


def test_assignment_matches_generator():
    spec = SyntheticSpec(
        12,
        2,
        (Archetype("low", FLAT), Archetype("high", tuple([50.0] * 24), (1, 1), 0.0)),
        rng_seed=7,
    )
    truth = assign_archetypes(spec)
    pset = generate_synthetic(spec)
    rows = pset.household_rows()
    for h, hid in enumerate(sorted(rows, key=lambda x: int(x[1:]))):
        mean_total = pset.values[rows[hid]].sum(axis=1).mean()
        expected_high = truth[h] == 1
        assert (mean_total > 600) == expected_high


def test_empty_archetypes_rejected():
    with pytest.raises(ConfigError):
        SyntheticSpec(1, 1, ())


def test_bad_template_rejected():
    with pytest.raises(ConfigError):
        Archetype("a", tuple([1.0] * 23))
    with pytest.raises(ConfigError):
        Archetype("a", tuple([-1.0] + [1.0] * 23))
