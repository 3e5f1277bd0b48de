import math

import numpy as np
import pytest
from scipy.stats import lognorm

from hyperurn.errors import DimensionTooHigh, SingularCovariance
from hyperurn.montecarlo.normality import hz_null_moments, hz_smoothing, hz_test


def reference_hz(X):
    """Direct double loop over observations with an explicit inverse covariance"""
    n, p = X.shape
    centered = X - X.mean(axis=0)
    S_inv = np.linalg.inv(centered.T @ centered / n)
    beta = (1 / math.sqrt(2)) * ((2 * p + 1) / 4) ** (1 / (p + 4)) * n ** (1 / (p + 4))

    pair_sum = 0.0
    for j in range(n):
        for k in range(n):
            d = X[j] - X[k]
            pair_sum += math.exp(-beta ** 2 / 2 * float(d @ S_inv @ d))
    mean_sum = 0.0
    for j in range(n):
        d = centered[j]
        mean_sum += math.exp(-beta ** 2 / (2 * (1 + beta ** 2)) * float(d @ S_inv @ d))

    statistic = (pair_sum / n
                 - 2 * (1 + beta ** 2) ** (-p / 2) * mean_sum
                 + n * (1 + 2 * beta ** 2) ** (-p / 2))

    a = 1 + 2 * beta ** 2
    wb = (1 + beta ** 2) * (1 + 3 * beta ** 2)
    mu = 1 - a ** (-p / 2) * (1 + p * beta ** 2 / a + p * (p + 2) * beta ** 4 / (2 * a ** 2))
    si2 = (2 * (1 + 4 * beta ** 2) ** (-p / 2)
           + 2 * a ** (-p) * (1 + 2 * p * beta ** 4 / a ** 2 + 3 * p * (p + 2) * beta ** 8 / (4 * a ** 4))
           - 4 * wb ** (-p / 2) * (1 + 3 * p * beta ** 4 / (2 * wb) + p * (p + 2) * beta ** 8 / (2 * wb ** 2)))
    pmu = math.log(math.sqrt(mu ** 4 / (si2 + mu ** 2)))
    psi = math.sqrt(math.log(1 + si2 / mu ** 2))
    p_value = lognorm.sf(statistic, psi, scale=math.exp(pmu))
    return statistic, p_value


@pytest.fixture
def normal_fixture():
    rng = np.random.default_rng(20240611)
    return rng.standard_normal((100, 3)) @ np.array([[1.0, 0.3, 0.0], [0.0, 1.0, -0.2], [0.0, 0.0, 0.5]])


def test_matches_reference_implementation(normal_fixture):
    result = hz_test(normal_fixture)
    statistic, p_value = reference_hz(normal_fixture)
    assert result.statistic == pytest.approx(statistic, rel=1e-6)
    assert result.p_value == pytest.approx(p_value, rel=1e-6, abs=1e-10)


def test_normal_sample_is_not_rejected(normal_fixture):
    assert hz_test(normal_fixture).p_value > 0.001


def test_heavy_skew_is_rejected():
    rng = np.random.default_rng(5)
    X = rng.exponential(size=(300, 2)) ** 3
    assert hz_test(X).p_value < 0.01


def test_statistic_is_nonnegative():
    rng = np.random.default_rng(11)
    for _ in range(10):
        X = rng.uniform(size=(40, 2))
        assert hz_test(X).statistic >= 0


def test_result_is_affine_invariant(normal_fixture):
    transform = np.array([[2.0, 1.0, 0.0], [0.0, 3.0, 1.0], [1.0, 0.0, 1.0]])
    moved = normal_fixture @ transform + np.array([5.0, -2.0, 7.0])
    assert hz_test(moved).statistic == pytest.approx(hz_test(normal_fixture).statistic, rel=1e-8)


def test_p_value_is_a_probability(normal_fixture):
    p_value = hz_test(normal_fixture).p_value
    assert 0.0 <= p_value <= 1.0


def test_identical_samples_are_singular():
    with pytest.raises(SingularCovariance):
        hz_test(np.ones((20, 3)))


def test_collinear_samples_are_singular():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(30)
    with pytest.raises(SingularCovariance):
        hz_test(np.column_stack([x, 2 * x]))


def test_too_few_samples():
    with pytest.raises(DimensionTooHigh):
        hz_test(np.arange(9.0).reshape(3, 3))


def test_smoothing_parameter():
    assert hz_smoothing(100, 3) == pytest.approx((1 / math.sqrt(2)) * (7 / 4) ** (1 / 7) * 100 ** (1 / 7))


def test_null_moments_are_positive():
    mean, variance = hz_null_moments(hz_smoothing(1000, 3), 3)
    assert 0 < mean < 1
    assert variance > 0
