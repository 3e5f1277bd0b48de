import math
from fractions import Fraction

import numpy as np
import pytest

from hyperurn import settings
from hyperurn.asymptotics import (
    compare_methods,
    core_index_regime,
    cov3_closed_form,
    eigenvalue_certificate,
    hrt_limit_covariance,
    limit_covariance,
    limit_mean_direction,
    noise_matrix,
    order_eigenvalues,
    projector,
    spectral_analysis,
    truncation_horizon,
    urn_limit_covariance,
)
from hyperurn.errors import DegenerateLeading, LargeOrCriticalIndex
from hyperurn.models.hyperrecursive import exact_mean_vector, hrt_core_matrix, hrt_urn, v1_hrt
from hyperurn.oracle import exact_distribution, exact_moments
from hyperurn.urn_core import new_urn

THETAS = [2, 3, 4, 5]
LEVELS = [1, 2, 3, 4, 5]


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("k", LEVELS)
def test_hyperrecursive_spectrum(theta, k):
    spectral = spectral_analysis(hrt_core_matrix(theta, k), 1)
    expected = [1.0] + [1.0 - theta] * k
    np.testing.assert_allclose(spectral.eigenvalues.real, expected, atol=1e-9)
    np.testing.assert_allclose(spectral.eigenvalues.imag, 0, atol=1e-9)
    assert spectral.residual < 1e-9
    np.testing.assert_allclose(spectral.v1, v1_hrt(theta, k), atol=1e-10)
    assert spectral.core_index == pytest.approx(1 - theta)
    assert spectral.regime == "small"


def test_theta3_single_level_spectrum():
    spectral = spectral_analysis(hrt_core_matrix(3, 1), 1)
    np.testing.assert_allclose(spectral.eigenvalues.real, [1, -2])


def test_degenerate_leading_eigenvalue():
    with pytest.raises(DegenerateLeading):
        spectral_analysis(np.eye(3), 1)


def test_order_eigenvalues():
    ordered = order_eigenvalues(np.array([-1 + 0j, 2 + 0j, 0.5 - 1j, 0.5 + 1j]))
    assert ordered.tolist() == [2, 0.5 + 1j, 0.5 - 1j, -1]


@pytest.mark.parametrize("core_index,regime", [(-1.0, "small"), (0.5, "critical"), (0.75, "large")])
def test_core_index_regime(core_index, regime):
    assert core_index_regime(core_index) == regime


@pytest.mark.parametrize("theta", THETAS)
def test_eigenvalue_certificate(theta):
    A = hrt_core_matrix(theta, 3)
    assert eigenvalue_certificate(A, 1) == 0
    assert eigenvalue_certificate(A, 1 - theta) == 0
    assert eigenvalue_certificate(A, Fraction(1, 2)) != 0


def test_projector_example():
    P = projector([0.5, 0.5])
    np.testing.assert_allclose(P, [[0.5, -0.5], [-0.5, 0.5]])


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("k", LEVELS)
def test_projector_is_idempotent_in_exact_arithmetic(theta, k):
    P = projector(v1_hrt(theta, k, exact=True))
    assert (P.dot(P) == P).all()
    v1 = np.array(v1_hrt(theta, k, exact=True), dtype=object)
    assert all(value == 0 for value in v1.dot(P))


def test_noise_matrix_single_draw():
    A = hrt_core_matrix(2, 3)
    v1 = v1_hrt(2, 3)
    np.testing.assert_allclose(noise_matrix(A, v1, 1), A.T @ np.diag(v1) @ A)


def test_noise_matrix_is_symmetric():
    B = noise_matrix(hrt_core_matrix(4, 3), v1_hrt(4, 3), 3)
    np.testing.assert_allclose(B, B.T)


def test_theta2_covariance_spot_values():
    sigma = hrt_limit_covariance(2, 3)
    assert sigma[0, 0] == pytest.approx(1 / 12, rel=1e-8)
    assert sigma[0, 1] == pytest.approx(-7 / 72, rel=1e-8)
    np.testing.assert_allclose(
        np.round(sigma, 3),
        [[0.083, -0.097, -0.012], [-0.097, 0.164, -0.043], [-0.012, -0.043, 0.091]],
    )


@pytest.mark.parametrize("theta", THETAS)
def test_covariance_matches_closed_form(theta):
    np.testing.assert_allclose(hrt_limit_covariance(theta, 3), cov3_closed_form(theta), rtol=1e-8)


@pytest.mark.parametrize("theta", THETAS)
def test_covariance_block_independent_of_lumping(theta):
    deeper = hrt_limit_covariance(theta, 5)[:3, :3]
    np.testing.assert_allclose(deeper, cov3_closed_form(theta), rtol=1e-8)


@pytest.mark.parametrize("theta,expected", [(3, 4 / 45), (5, 16 / 225)])
def test_closed_form_leading_entry(theta, expected):
    assert cov3_closed_form(theta)[0, 0] == pytest.approx(expected)


@pytest.mark.parametrize("theta", THETAS)
def test_sylvester_and_quadrature_agree(theta):
    spec = hrt_urn(theta, 3)
    sylvester, quadrature, disagreement = compare_methods(spec.A, spec.b, spec.s, v1_hrt(theta, 3))
    assert disagreement < settings.METHOD_AGREEMENT_TOL
    assert quadrature.horizon > 0


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("k", LEVELS)
def test_covariance_invariants(theta, k):
    limit = urn_limit_covariance(hrt_urn(theta, k))
    assert limit.symmetry_error <= settings.SYMMETRY_TOL
    assert limit.min_eigenvalue >= -settings.PSD_TOL
    assert limit.balanced_direction_error < settings.BALANCED_DIRECTION_TOL
    assert limit.residual < settings.SYLVESTER_RESIDUAL_TOL


def test_single_level_variance():
    # theta = 2: X_n / sqrt(n) has limiting variance 1/12 at level 1
    assert hrt_limit_covariance(2, 1)[0, 0] == pytest.approx(1 / 12)


def test_exact_covariance_approaches_limit():
    theta = 2
    spec = hrt_urn(theta, 2)
    limit = hrt_limit_covariance(theta, 1)[0, 0]
    scaled = []
    for n in range(3, 11):
        _, covariance = exact_moments(exact_distribution(spec, n))
        scaled.append(float(covariance[0][0]) / n)
    assert all(value > limit for value in scaled)
    assert all(later < earlier for earlier, later in zip(scaled, scaled[1:]))


def test_large_index_is_refused():
    # triangular urn: eigenvalues 4 and 3, core index 3/4
    A = np.array([[3, 1], [0, 4]])
    spec = new_urn(A, 1, [1, 1])
    with pytest.raises(LargeOrCriticalIndex):
        urn_limit_covariance(spec)
    with pytest.raises(LargeOrCriticalIndex):
        limit_mean_direction(spec)


def circulant(first_row):
    return np.array([np.roll(first_row, shift) for shift in range(len(first_row))])


def test_close_distinct_eigenvalues_stay_apart():
    # eigenvalues 300, 151 (x2), 147 (x2), -2: core index 151/300 is just above 1/2
    A = circulant([149, 51, 0, 49, 0, 51])
    spec = new_urn(A, 1, [1, 0, 0, 0, 0, 0])
    spectral = spectral_analysis(spec.A, spec.b)
    np.testing.assert_allclose(spectral.eigenvalues.real, [300, 151, 151, 147, 147, -2], atol=1e-8)
    assert spectral.core_index == pytest.approx(151 / 300)
    assert spectral.regime == "large"
    with pytest.raises(LargeOrCriticalIndex):
        urn_limit_covariance(spec)


def test_limit_mean_direction():
    np.testing.assert_allclose(limit_mean_direction(hrt_urn(4, 3)), [1 / 4, 3 / 16, 9 / 64, 27 / 64])


def test_mean_per_draw_approaches_direction():
    n = 10 ** 5
    mean = exact_mean_vector(n, 3, 3, exact=False)
    np.testing.assert_allclose(mean / n, limit_mean_direction(hrt_urn(3, 3)), rtol=1e-3)


def test_truncation_horizon_covers_integrand():
    theta = 3
    spec = hrt_urn(theta, 3)
    spectral = spectral_analysis(spec.A, spec.b)
    P = projector(spectral.v1)
    C = P.T @ noise_matrix(spec.A, spectral.v1, spec.s) @ P
    deflated = spec.A - np.outer(np.ones(spec.k), spectral.v1)
    horizon = truncation_horizon(deflated, 1, C, spectral.lambda2)
    assert horizon >= -math.log(settings.QUADRATURE_TAIL_TOL) / (1 - 2 * spectral.lambda2.real)


@pytest.mark.parametrize("theta", THETAS)
def test_quadrature_stable_under_horizon_changes(theta):
    spec = hrt_urn(theta, 3)
    spectral = spectral_analysis(spec.A, spec.b)
    chosen = limit_covariance(spec.A, spec.b, spec.s, spectral.v1, method="quadrature", spectral=spectral)

    def sigma_to(horizon):
        return limit_covariance(spec.A, spec.b, spec.s, spectral.v1, method="quadrature",
                                spectral=spectral, horizon=horizon).sigma

    doubled = np.abs(sigma_to(2 * chosen.horizon) - chosen.sigma).max()
    halved = np.abs(sigma_to(chosen.horizon / 2) - chosen.sigma).max()
    assert doubled < 1e-8
    assert halved < 1e-6
    assert halved + 1e-12 >= doubled


def test_unknown_method():
    spec = hrt_urn(2, 2)
    with pytest.raises(ValueError):
        limit_covariance(spec.A, spec.b, spec.s, v1_hrt(2, 2), method="simulation")
