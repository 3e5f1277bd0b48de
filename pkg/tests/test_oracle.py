from fractions import Fraction

import pytest

from hyperurn.errors import StateSpaceExceeded
from hyperurn.models.hyperrecursive import exact_mean_levels12, exact_mean_vector, hrt_urn
from hyperurn.oracle import exact_distribution, exact_moments, largest_enumerable_n, support_bound


def test_two_step_distribution():
    dist = exact_distribution(hrt_urn(2, 2), 2)
    assert dist.support == {(2, 2, 0): Fraction(2, 3), (3, 0, 1): Fraction(1, 3)}
    mean, covariance = exact_moments(dist)
    assert mean[0] == Fraction(7, 3)
    assert covariance[0][0] == Fraction(2, 9)


def test_first_step_is_a_single_atom():
    dist = exact_distribution(hrt_urn(3, 3), 1)
    assert dist.support == {(2, 2, 0, 0): 1}


def test_age_zero_is_initial_state():
    dist = exact_distribution(hrt_urn(4, 2), 0)
    assert dist.support == {(4, 0, 0): 1}


@pytest.mark.parametrize("theta", [2, 3])
@pytest.mark.parametrize("n", range(0, 7))
def test_exact_means_agree_across_methods(theta, n):
    dist = exact_distribution(hrt_urn(theta, 2), n)
    assert dist.total_probability() == 1
    mean, _ = exact_moments(dist)
    assert mean == exact_mean_vector(n, theta, 2, exact=True)
    assert tuple(mean[:2]) == exact_mean_levels12(n, theta)


def test_counts_stay_balanced():
    spec = hrt_urn(3, 3)
    dist = exact_distribution(spec, 5)
    assert all(sum(x) == spec.total_at(5) for x in dist.support)
    assert all(min(x) >= 0 for x in dist.support)


def test_covariance_is_symmetric_with_zero_row_sums():
    _, covariance = exact_moments(exact_distribution(hrt_urn(3, 2), 5))
    size = len(covariance)
    assert all(covariance[i][j] == covariance[j][i] for i in range(size) for j in range(size))
    # the total count is deterministic
    assert all(sum(row) == 0 for row in covariance)


def test_marginal_merges_atoms():
    dist = exact_distribution(hrt_urn(2, 2), 2)
    assert dist.marginal(1).support == {(2,): Fraction(2, 3), (3,): Fraction(1, 3)}


def test_json_document_uses_rational_strings():
    document = exact_distribution(hrt_urn(2, 2), 2).to_json_dict()
    assert document["n"] == 2
    assert {"x": [2, 2, 0], "p": "2/3"} in document["support"]


def test_state_cap():
    spec = hrt_urn(2, 3)
    with pytest.raises(StateSpaceExceeded) as excinfo:
        exact_distribution(spec, 10_000)
    error = excinfo.value
    assert error.requested_n == 10_000
    assert error.cap == 1_000_000
    assert error.attained_n == largest_enumerable_n(spec, 1_000_000)
    assert support_bound(spec, error.attained_n) <= error.cap < support_bound(spec, error.attained_n + 1)


def test_small_cap():
    with pytest.raises(StateSpaceExceeded):
        exact_distribution(hrt_urn(3, 3), 5, cap=10)


def test_negative_age():
    with pytest.raises(ValueError):
        exact_distribution(hrt_urn(3, 3), -1)
