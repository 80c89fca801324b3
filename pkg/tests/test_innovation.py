import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freelunch import DomainError, InnovationLaw, law_degenerate, law_from_atoms, law_rademacher, law_two_point, make_rng, moments, sample
from freelunch.errors import ConfigError
from freelunch.innovation import PRNG_ID, law_at, law_from_dict, sample_array

# generated once with make_rng(42) and frozen
GOLDEN_RADEMACHER_42 = [1, -1, 1, 1, -1, 1, 1, 1, -1, -1, -1, 1, 1, 1, -1, -1, 1, -1, 1, 1, 1, -1, 1, 1]


def test_rademacher():
    law = law_rademacher()
    assert (law.M, law.m) == (1.0, 1.0)
    assert moments(law) == (0.0, 1.0)
    assert law.is_symmetric_support


def test_two_point_moments():
    law = law_two_point(-2.0, 1.0)
    assert law.probs[1] == pytest.approx(2 / 3, abs=1e-15)
    assert law.mean == pytest.approx(0.0, abs=1e-15)
    assert law.variance == pytest.approx(2.0, abs=1e-14)
    assert (law.M, law.m) == (1.0, 2.0)
    law = law_two_point(-1.0, 3.0)
    assert law.probs[1] == 0.25
    assert law.variance == pytest.approx(3.0, abs=1e-14)
    assert law_two_point(-1.0, 1.0) == law_rademacher()


def test_two_point_signs():
    with pytest.raises(DomainError):
        law_two_point(1.0, 2.0)
    with pytest.raises(DomainError):
        law_two_point(-1.0, 0.0)


@pytest.mark.parametrize(
    "values,probs",
    [((1.0, 0.0), (0.5, 0.5)), ((0.0, 1.0), (0.5, 0.6)), ((0.0, 1.0), (0.0, 1.0)), ((), ()), ((0.0, math.inf), (0.5, 0.5))],
)
def test_invalid_laws(values, probs):
    with pytest.raises(DomainError):
        InnovationLaw(values, probs)


def test_fourth_cumulant():
    # Rademacher: mu4 = 1, sigma^4 = 1, so kappa4 = -2
    assert law_rademacher().fourth_cumulant == -2.0
    assert law_degenerate().fourth_cumulant == 0.0


def test_separates():
    law = law_two_point(-2.0, 1.0)
    assert law.separates(0.5)
    assert not law.separates(1.0)
    assert not law_degenerate().separates()


def test_law_from_atoms_sorts():
    law = law_from_atoms([1.0, -1.0, 0.0], [0.25, 0.25, 0.5])
    assert law.values == (-1.0, 0.0, 1.0)
    assert law.probs == (0.25, 0.5, 0.25)


def test_law_provider_per_n():
    provider = lambda n: law_two_point(-1.0, float(n))
    assert law_at(provider, 3).M == 3.0
    assert law_at(law_rademacher(), 7) == law_rademacher()
    with pytest.raises(DomainError):
        law_at(lambda n: 1.0, 2)


@pytest.mark.parametrize("law", [law_rademacher(), law_two_point(-2.0, 1.0), law_from_atoms([0, 1, 2], [0.2, 0.3, 0.5])])
def test_dict_round_trip(law):
    assert law_from_dict(law.to_dict()) == law


def test_dict_errors():
    with pytest.raises(ConfigError):
        law_from_dict({"type": "gaussian"})
    with pytest.raises(ConfigError):
        law_from_dict({"type": "two_point", "down": -1})


def test_golden_sequence():
    rng = make_rng(42)
    assert [int(v) for v in sample_array(law_rademacher(), rng, 24)] == GOLDEN_RADEMACHER_42
    rng = make_rng(42)
    assert [sample(law_rademacher(), rng) for _ in range(24)] == GOLDEN_RADEMACHER_42
    assert PRNG_ID == "numpy.random.PCG64"


def test_seed_range():
    make_rng(2**64 - 1)
    with pytest.raises(DomainError):
        make_rng(2**64)
    with pytest.raises(DomainError):
        make_rng(-1)


def test_rademacher_mean_clt_bound():
    N = 10**5
    draws = sample_array(law_rademacher(), make_rng(42), N)
    assert abs(draws.mean()) < 3 / math.sqrt(N)


def test_empirical_frequencies_within_multinomial_bounds():
    law = law_from_atoms([-1.0, 0.0, 2.0], [0.2, 0.5, 0.3])
    N = 10**6
    draws = sample_array(law, make_rng(7), N)
    for v, p in zip(law.values, law.probs):
        freq = np.count_nonzero(draws == v) / N
        assert abs(freq - p) < 4 * math.sqrt(p * (1 - p) / N)


@given(
    atoms=st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=5, unique=True),
    seed=st.integers(0, 2**64 - 1),
)
@settings(max_examples=60, deadline=None)
def test_samples_are_atoms(atoms, seed):
    probs = [1.0 / len(atoms)] * len(atoms)
    law = law_from_atoms(atoms, probs)
    draws = sample_array(law, make_rng(seed), 200)
    assert set(draws.tolist()) <= set(law.values)
    assert law.M == max(atoms) and law.m == -min(atoms)
