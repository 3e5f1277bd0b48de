"""
Asymptotics - Spectral data of core matrices and the limiting covariance matrix

For a balanced irreducible core matrix with small core index the count
vector satisfies E[X_n] ~ n b v1 and Cov(X_n) / n -> Sigma, where

    Sigma = b * int_0^inf exp(m A^T) P^T B P exp(m A) exp(-b m) dm.

Sigma is computed as b * S with S solving the Sylvester equation
(A^T - b/2 I) S + S (A - b/2 I) = -P^T B P, and cross-checked by
quadrature of the integral.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import sympy
from scipy.integrate import quad_vec
from scipy.linalg import expm, null_space, solve_sylvester

from . import settings
from .errors import DegenerateLeading, LargeOrCriticalIndex, SolveFailure
from .models.hyperrecursive import hrt_urn
from .urn_core import UrnSpec

logger = logging.getLogger(__name__)

EIGEN_CLUSTER_FACTOR = 10.0
EIGEN_COINCIDENCE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Ordered eigenvalues, principal left eigenvector and core index"""

    eigenvalues: np.ndarray
    v1: np.ndarray
    lambda1: float
    core_index: float
    residual: float

    @property
    def lambda2(self) -> complex:
        return complex(self.eigenvalues[1])

    @property
    def regime(self) -> str:
        return core_index_regime(self.core_index)


@dataclass(frozen=True, eq=False)
class CovarianceLimit:
    """Limiting covariance Sigma with solve diagnostics"""

    sigma: np.ndarray
    method: str
    residual: float
    horizon: Optional[float] = None

    @property
    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.sigma - self.sigma.T)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.sigma + self.sigma.T) / 2).min())

    @property
    def balanced_direction_error(self) -> float:
        """max |Sigma @ 1|; zero because the total count is deterministic"""
        return float(np.max(np.abs(self.sigma.sum(axis=1))))

    def block(self, k: int) -> np.ndarray:
        return self.sigma[:k, :k]


def core_index_regime(core_index: float) -> str:
    if math.isclose(core_index, settings.CORE_INDEX_SMALL_LIMIT, abs_tol=1e-12):
        return "critical"
    return "small" if core_index < settings.CORE_INDEX_SMALL_LIMIT else "large"


def _cluster_eigenvalues(A: np.ndarray, values: np.ndarray, tol: float) -> np.ndarray:
    """
    Replace numerically coincident eigenvalues by their cluster mean

    A cluster is merged only when its mean is itself an eigenvalue of A up
    to rounding, i.e. sigma_min(A - mean I) is negligible. Distinct
    eigenvalues closer than tol stay apart.
    """
    size = values.size
    labels = list(range(size))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(size):
        for j in range(i):
            if abs(values[i] - values[j]) < tol:
                labels[find(i)] = find(j)

    scale = max(1.0, np.linalg.norm(A, 2))
    clustered = values.astype(complex)
    for root in {find(i) for i in range(size)}:
        members = [i for i in range(size) if find(i) == root]
        if len(members) == 1:
            continue
        mean = values[members].mean()
        smallest = np.linalg.svd(A - mean * np.eye(size), compute_uv=False).min()
        if smallest <= EIGEN_COINCIDENCE_TOL * scale:
            clustered[members] = mean
    return clustered


def order_eigenvalues(values: np.ndarray) -> np.ndarray:
    """Descending real part, then descending imaginary part, then original index"""
    order = sorted(range(values.size), key=lambda i: (-values[i].real, -values[i].imag, i))
    return values[order]


def spectral_analysis(A, b: float) -> SpectralData:
    """
    Eigenvalues, principal left eigenvector and core index of a b-balanced matrix

    Eigenvalues of defective blocks scatter around the true value by about
    eps^(1/size); such clusters are merged and replaced by their mean,
    which is well conditioned. Distinct eigenvalues inside that radius
    are kept apart.

    Raises:
        DegenerateLeading: If b is not a simple leading eigenvalue
    """
    A = np.asarray(A, dtype=float)
    size = A.shape[0]
    raw = np.linalg.eigvals(A)
    tol = EIGEN_CLUSTER_FACTOR * np.finfo(float).eps ** (1.0 / size) * max(1.0, np.linalg.norm(A, 2))
    eigenvalues = order_eigenvalues(_cluster_eigenvalues(A, raw, tol))

    lambda1 = eigenvalues[0]
    if abs(lambda1 - b) > settings.LEADING_EIGENVALUE_TOL * max(1.0, abs(b)):
        raise DegenerateLeading(f"Leading eigenvalue {lambda1} differs from balance {b}")
    if size > 1 and eigenvalues[1] == lambda1:
        raise DegenerateLeading(f"Leading eigenvalue {lambda1.real:g} is not simple")

    kernel = null_space(A.T - b * np.eye(size))
    if kernel.shape[1] != 1:
        raise DegenerateLeading(f"Left eigenspace of {b} has dimension {kernel.shape[1]}")
    v1 = kernel[:, 0] / kernel[:, 0].sum()
    residual = float(np.max(np.abs(v1 @ A - b * v1)))
    if residual > settings.EIGEN_RESIDUAL_TOL * max(1.0, np.abs(A).max()):
        logger.warning("Left eigenvector residual %.3e exceeds tolerance", residual)

    core_index = float(eigenvalues[1].real / b) if size > 1 else -math.inf
    return SpectralData(
        eigenvalues=eigenvalues,
        v1=v1,
        lambda1=float(lambda1.real),
        core_index=core_index,
        residual=residual,
    )


def eigenvalue_certificate(A, eigenvalue) -> Fraction:
    """det(A - lambda I) in exact rational arithmetic; zero iff lambda is an eigenvalue"""
    matrix = sympy.Matrix(np.asarray(A).tolist())
    value = sympy.Rational(str(Fraction(eigenvalue)))
    det = (matrix - value * sympy.eye(matrix.shape[0])).det()
    return Fraction(int(sympy.numer(det)), int(sympy.denom(det)))


def _as_array(v1) -> np.ndarray:
    if any(isinstance(v, Fraction) for v in v1):
        return np.array(list(v1), dtype=object)
    return np.asarray(v1, dtype=float)


def projector(v1) -> np.ndarray:
    """
    Complementary spectral projector P = I - 1 v1

    Works on floats or, for Fraction input, on exact object arrays.
    """
    v1 = _as_array(v1)
    identity = np.eye(v1.size, dtype=v1.dtype)
    ones = np.ones(v1.size, dtype=v1.dtype)
    return identity - np.outer(ones, v1)


def noise_matrix(A, v1, s: int) -> np.ndarray:
    """B = s^-2 A^T Q A with Q = s(s-1) v1^T v1 + s diag(v1)"""
    v1 = _as_array(v1)
    A = np.asarray(A).astype(v1.dtype)
    Q = s * (s - 1) * np.outer(v1, v1) + s * np.diag(v1)
    return A.T.dot(Q).dot(A) / (s * s)


def sylvester_residual(A, b: float, S: np.ndarray, C: np.ndarray) -> float:
    """max |(A^T - b/2 I) S + S (A - b/2 I) + C|, relative to max |C|"""
    A = np.asarray(A, dtype=float)
    shifted = A - b / 2 * np.eye(A.shape[0])
    scale = max(np.abs(C).max(), np.finfo(float).tiny)
    return float(np.abs(shifted.T @ S + S @ shifted + C).max() / scale)


def truncation_horizon(deflated: np.ndarray, b: float, C: np.ndarray, lambda2: complex,
                       tol: float = settings.QUADRATURE_TAIL_TOL) -> float:
    """
    Upper integration limit for the covariance integral

    Starts at -ln(tol) / (b - 2 Re lambda2) and doubles until the integrand's
    largest entry drops below tol * max |C|; the doubling absorbs the
    polynomial factors of defective eigenvalues.
    """
    rate = b - 2 * lambda2.real
    horizon = -math.log(tol) / rate
    shifted = deflated - b / 2 * np.eye(deflated.shape[0])
    scale = np.abs(C).max()
    for _ in range(32):
        E = expm(horizon * shifted)
        if np.abs(E.T @ C @ E).max() <= tol * scale:
            break
        horizon *= 2
    return horizon


def limit_covariance(A, b: float, s: int, v1, method: str = "sylvester",
                     spectral: Optional[SpectralData] = None,
                     horizon: Optional[float] = None) -> CovarianceLimit:
    """
    Limiting covariance matrix Sigma of X_n / sqrt(n)

    The principal direction is deflated (A - b 1 v1) before solving, which
    leaves the integrand unchanged because P commutes with A and keeps the
    Sylvester operator nonsingular whenever the core index is below 1/2.
    Sigma is the limit of Cov(X_n) / n; for b != 1 this scaling is taken
    as stated and has not been checked against closed forms.

    Args:
        A: Core matrix
        b: Balance
        s: Sample size
        v1: Principal left eigenvector, entries summing to 1
        method: "sylvester" or "quadrature"
        spectral: Precomputed spectral data of A
        horizon: Quadrature upper limit; truncation_horizon when omitted

    Raises:
        LargeOrCriticalIndex: Core index at or above 1/2
        SolveFailure: Singular operator or residual above tolerance
    """
    A = np.asarray(A, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    spectral = spectral if spectral is not None else spectral_analysis(A, b)
    if spectral.core_index >= settings.CORE_INDEX_SMALL_LIMIT:
        raise LargeOrCriticalIndex(
            f"Core index {spectral.core_index:.6g} is not below 1/2; "
            "the Gaussian limit needs a small core index"
        )
    if b != 1:
        logger.warning("Balance b=%s: Sigma is reported as lim Cov(X_n)/n, scaling unverified for b != 1", b)

    size = A.shape[0]
    P = projector(v1)
    C = P.T @ noise_matrix(A, v1, s) @ P
    C = (C + C.T) / 2
    deflated = A - b * np.outer(np.ones(size), v1)
    shifted = deflated - b / 2 * np.eye(size)

    if method == "sylvester":
        eig = np.linalg.eigvals(shifted)
        gap = np.min(np.abs(eig[:, None] + eig[None, :]))
        if gap < 1e-12:
            raise SolveFailure(f"Sylvester operator is singular (gap {gap:.3e})")
        S = solve_sylvester(shifted.T, shifted, -C)
        horizon = None
    elif method == "quadrature":
        if horizon is None:
            horizon = truncation_horizon(deflated, b, C, spectral.lambda2)

        def integrand(m):
            E = expm(m * shifted)
            return E.T @ C @ E

        S, error = quad_vec(integrand, 0.0, horizon,
                            epsabs=settings.QUADRATURE_EPSABS, epsrel=settings.QUADRATURE_EPSREL)
        logger.debug("Quadrature to m=%.3f, error estimate %.3e", horizon, error)
    else:
        raise ValueError(f"Unknown covariance method: {method}")

    S = (S + S.T) / 2
    residual = sylvester_residual(A, b, S, C)
    if method == "sylvester" and residual > settings.SYLVESTER_RESIDUAL_TOL:
        raise SolveFailure(f"Sylvester residual {residual:.3e} above tolerance")
    logger.debug("Sigma via %s: residual %.3e", method, residual)
    return CovarianceLimit(sigma=b * S, method=method, residual=residual, horizon=horizon)


def compare_methods(A, b: float, s: int, v1) -> tuple:
    """Sigma by both routes and their largest entrywise disagreement"""
    spectral = spectral_analysis(A, b)
    sylvester = limit_covariance(A, b, s, v1, method="sylvester", spectral=spectral)
    quadrature = limit_covariance(A, b, s, v1, method="quadrature", spectral=spectral)
    disagreement = float(np.max(np.abs(sylvester.sigma - quadrature.sigma)))
    return sylvester, quadrature, disagreement


def urn_limit_covariance(spec: UrnSpec, method: str = "sylvester") -> CovarianceLimit:
    spectral = spectral_analysis(spec.A, spec.b)
    return limit_covariance(spec.A, spec.b, spec.s, spectral.v1, method=method, spectral=spectral)


def hrt_limit_covariance(theta: int, k: int, method: str = "sylvester") -> np.ndarray:
    """Sigma_inf of the first k containment levels: upper-left block of the lumped urn's Sigma"""
    return urn_limit_covariance(hrt_urn(theta, k), method=method).block(k)


def cov3_closed_form(theta: int) -> np.ndarray:
    """Closed-form Sigma_inf for the first three containment levels"""
    if theta < 2:
        raise ValueError(f"theta must be at least 2, got {theta}")
    t = float(theta)
    c = (t - 1) ** 2
    d = 2 * t - 1
    s11 = c / (t ** 2 * d)
    s12 = -c * (t ** 2 + 2 * t - 1) / (t ** 3 * d ** 2)
    s13 = -c * (t ** 4 + t ** 3 - 7 * t ** 2 + 5 * t - 1) / (t ** 4 * d ** 3)
    s22 = c * (6 * t ** 4 - 6 * t ** 3 + 8 * t ** 2 - 5 * t + 1) / (t ** 4 * d ** 3)
    s23 = -c * (3 * t ** 6 - 16 * t ** 4 + 32 * t ** 3 - 24 * t ** 2 + 8 * t - 1) / (t ** 5 * d ** 4)
    s33 = c * (26 * t ** 8 - 74 * t ** 7 + 112 * t ** 6 - 152 * t ** 5 + 170 * t ** 4
               - 121 * t ** 3 + 50 * t ** 2 - 11 * t + 1) / (t ** 6 * d ** 5)
    return np.array([
        [s11, s12, s13],
        [s12, s22, s23],
        [s13, s23, s33],
    ])


def limit_mean_direction(spec: UrnSpec) -> np.ndarray:
    """Per-draw asymptotic mean increment b v1"""
    spectral = spectral_analysis(spec.A, spec.b)
    if spectral.core_index >= settings.CORE_INDEX_SMALL_LIMIT:
        raise LargeOrCriticalIndex(f"Core index {spectral.core_index:.6g} is not below 1/2")
    return spec.b * spectral.v1
