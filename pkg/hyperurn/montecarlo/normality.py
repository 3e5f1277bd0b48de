"""
Henze-Zirkler Test - Multivariate normality of replicated count vectors
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import lognorm
from sklearn.covariance import EmpiricalCovariance
from sklearn.metrics import pairwise_distances

from ..errors import DimensionTooHigh, SingularCovariance


@dataclass(frozen=True)
class HZResult:
    statistic: float
    p_value: float
    beta: float


def hz_smoothing(n: int, p: int) -> float:
    """Smoothing parameter beta = ((2p+1)/4)^(1/(p+4)) n^(1/(p+4)) / sqrt(2)"""
    return ((2 * p + 1) / 4) ** (1 / (p + 4)) * n ** (1 / (p + 4)) / math.sqrt(2)


def hz_null_moments(beta: float, p: int) -> tuple:
    """Mean and variance of the HZ statistic under normality"""
    b2 = beta ** 2
    a = 1 + 2 * b2
    wb = (1 + b2) * (1 + 3 * b2)
    mean = 1 - a ** (-p / 2) * (1 + p * b2 / a + p * (p + 2) * beta ** 4 / (2 * a ** 2))
    variance = (
        2 * (1 + 4 * b2) ** (-p / 2)
        + 2 * a ** (-p) * (1 + 2 * p * beta ** 4 / a ** 2 + 3 * p * (p + 2) * beta ** 8 / (4 * a ** 4))
        - 4 * wb ** (-p / 2) * (1 + 3 * p * beta ** 4 / (2 * wb) + p * (p + 2) * beta ** 8 / (2 * wb ** 2))
    )
    return mean, variance


def hz_test(samples) -> HZResult:
    """
    Henze-Zirkler statistic and lognormal-approximation p-value

    Uses the maximum-likelihood covariance (divisor R) for all Mahalanobis
    distances, as in the original definition.

    Args:
        samples: R x p array of observations

    Returns:
        HZResult: statistic, p-value and the smoothing parameter used

    Raises:
        DimensionTooHigh: If R <= p
        SingularCovariance: If the sample covariance is rank deficient
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if n <= p:
        raise DimensionTooHigh(f"Need more samples than dimensions, got {n} samples in {p} dimensions")

    estimator = EmpiricalCovariance(assume_centered=False).fit(X)
    if np.linalg.matrix_rank(estimator.covariance_) < p:
        raise SingularCovariance(f"Sample covariance of {n} observations is singular")

    to_mean = estimator.mahalanobis(X)
    pairwise = pairwise_distances(X, metric="mahalanobis", VI=estimator.get_precision()) ** 2

    beta = hz_smoothing(n, p)
    b2 = beta ** 2
    statistic = n * (
        np.exp(-b2 / 2 * pairwise).sum() / n ** 2
        - 2 * (1 + b2) ** (-p / 2) * np.exp(-b2 / (2 * (1 + b2)) * to_mean).sum() / n
        + (1 + 2 * b2) ** (-p / 2)
    )

    mean, variance = hz_null_moments(beta, p)
    log_mean = math.log(math.sqrt(mean ** 4 / (variance + mean ** 2)))
    log_sd = math.sqrt(math.log1p(variance / mean ** 2))
    p_value = float(lognorm.sf(statistic, log_sd, scale=math.exp(log_mean)))
    return HZResult(statistic=float(statistic), p_value=p_value, beta=beta)
