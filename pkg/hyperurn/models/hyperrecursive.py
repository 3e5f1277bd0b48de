"""
Hyperrecursive Tree Model - Global containment profile as a (k+1)-color affine urn

A hyperrecursive tree starts with theta vertices sharing one hyperedge.
Each step adds a vertex that co-shares a new hyperedge with theta - 1
existing vertices chosen uniformly without replacement. Level i counts
vertices contained in exactly i hyperedges; the urn tracks levels 1..k
and lumps every deeper level into color k+1.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import digamma

from .. import settings
from ..oracle import ExactDistribution
from ..urn_core import UrnSpec
from .base_model import BaseUrnModel

logger = logging.getLogger(__name__)

Number = Union[Fraction, float]


@dataclass(frozen=True)
class HrtParams:
    """Hyperedge size theta, tracked containment levels k and age n"""

    theta: int
    k: int
    n: int = 0

    def __post_init__(self):
        if self.theta < 2:
            raise ValueError(f"theta must be at least 2, got {self.theta}")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.n < 0:
            raise ValueError(f"n must be nonnegative, got {self.n}")


@dataclass(frozen=True, eq=False)
class TreeState:
    """Per-vertex containment counts of an explicit hyperrecursive tree at age n"""

    containment: np.ndarray
    age: int

    @property
    def theta(self) -> int:
        return int(self.containment.size - self.age)

    def profile(self, k: int) -> np.ndarray:
        return tree_profile(self, k)


class HyperrecursiveTreeModel(BaseUrnModel):
    """Hyperrecursive tree profile urn with k tracked levels plus one lumped level"""

    def __init__(self, theta: int, k: int):
        super().__init__("hyperrecursive")
        self.params = HrtParams(theta, k)
        self.theta = theta
        self.k = k

    def core_matrix(self) -> np.ndarray:
        return hrt_core_matrix(self.theta, self.k)

    def sample_size(self) -> int:
        return self.theta - 1

    def initial_counts(self) -> np.ndarray:
        x0 = np.zeros(self.k + 1, dtype=np.int64)
        x0[0] = self.theta
        return x0

    @property
    def tracked_levels(self) -> int:
        # the lumped last color is dropped from user-facing profiles
        return self.k


def hrt_core_matrix(theta: int, k: int) -> np.ndarray:
    """
    Core matrix of the lumped profile urn, (k+1) x (k+1), every row summing to 1

    Row 1 is (-(theta-2), theta-1, 0, ...), row i for 1 < i <= k moves
    theta-1 vertices from level i to level i+1 and adds a level-1 vertex,
    and the lumped row only adds the new level-1 vertex.
    """
    HrtParams(theta, k)
    A = np.zeros((k + 1, k + 1), dtype=np.int64)
    A[0, 0] = -(theta - 2)
    A[0, 1] = theta - 1
    for i in range(1, k):
        A[i, 0] = 1
        A[i, i] = -(theta - 1)
        A[i, i + 1] = theta - 1
    A[k, 0] = 1
    return A


def hrt_urn(theta: int, k: int) -> UrnSpec:
    """Validated urn: s = theta - 1, x0 = (theta, 0, ..., 0)"""
    return HyperrecursiveTreeModel(theta, k).urn()


def harmonic_number(n: int, x: Number = 0, order: int = 1) -> Number:
    """Generalized harmonic number sum_{j=1..n} (j + x)^(-order)"""
    if isinstance(x, float):
        return sum((j + x) ** (-order) for j in range(1, n + 1))
    x = Fraction(x)
    return sum((Fraction(1) / (j + x) ** order for j in range(1, n + 1)), Fraction(0))


def exact_mean_levels12(n: int, theta: int) -> Tuple[Number, Number]:
    """
    Exact E[X_{n,1}] and E[X_{n,2}]

    Uses H_n = sum_{j<=n} 1/j. Values are Fractions up to
    settings.LOG_GAMMA_SWITCH; beyond it the gamma ratio comes from
    log-gamma differences and H_n from digamma.
    """
    HrtParams(theta, 1, n)
    if n <= settings.LOG_GAMMA_SWITCH:
        ratio = Fraction(math.factorial(theta - 1) * math.factorial(n), math.factorial(n + theta - 1))
        level1 = Fraction(n, theta) + 1 + (theta - 1) * ratio
        level2 = (Fraction(theta - 1, theta ** 2) * (n + theta)
                  + ratio * ((theta - 1) ** 2 * harmonic_number(n) - Fraction(theta - 1, theta)))
        return level1, level2

    ratio = math.exp(math.lgamma(theta) + math.lgamma(n + 1) - math.lgamma(n + theta))
    h_n = float(digamma(n + 1) + np.euler_gamma)
    level1 = n / theta + 1 + (theta - 1) * ratio
    level2 = (theta - 1) / theta ** 2 * (n + theta) + ratio * ((theta - 1) ** 2 * h_n - (theta - 1) / theta)
    return level1, level2


def asymptotic_mean(n: int, theta: int, i: int) -> float:
    """Leading-order mean of level i: ((theta-1)^(i-1) / theta^i) (n + theta)"""
    if i < 1:
        raise ValueError(f"Containment level must be at least 1, got {i}")
    return (theta - 1) ** (i - 1) / theta ** i * (n + theta)


def exact_mean_vector(n: int, theta: int, k: int, exact: Optional[bool] = None) -> Union[List[Fraction], np.ndarray]:
    """
    E[Y_n] by iterating E[Y_j] = E[Y_{j-1}] (I + A / tau_{j-1}) from theta * e_1

    Args:
        n: Age
        theta: Hyperedge size
        k: Tracked levels (vector has k+1 entries, last one lumped)
        exact: Fractions if True, floats if False; default is exact up to
            settings.EXACT_MEAN_RATIONAL_LIMIT

    Returns:
        Mean of the lumped profile vector
    """
    HrtParams(theta, k, n)
    if exact is None:
        exact = n <= settings.EXACT_MEAN_RATIONAL_LIMIT
    A = hrt_core_matrix(theta, k)

    if exact:
        rows = A.tolist()
        size = k + 1
        mean = [Fraction(theta)] + [Fraction(0)] * k
        for j in range(n):
            tau = theta + j
            flow = [sum(mean[i] * rows[i][c] for i in range(size) if rows[i][c]) for c in range(size)]
            mean = [mean[c] + flow[c] / tau for c in range(size)]
        return mean

    mean = np.zeros(k + 1)
    mean[0] = theta
    Af = A.astype(float)
    for j in range(n):
        mean = mean + (mean @ Af) / (theta + j)
    return mean


def v1_hrt(theta: int, k: int, exact: bool = False) -> Union[List[Fraction], np.ndarray]:
    """Principal left eigenvector of the core matrix, entries summing to 1"""
    HrtParams(theta, k)
    head = [Fraction((theta - 1) ** (i - 1), theta ** i) for i in range(1, k + 1)]
    v1 = head + [Fraction(theta - 1, theta) ** k]
    if exact:
        return v1
    return np.array([float(v) for v in v1])


def leading_mean_vector(theta: int, k: int) -> np.ndarray:
    """Centring vector mu_inf of the k tracked levels"""
    return v1_hrt(theta, k)[:k]


def grow_tree(theta: int, n: int, rng: np.random.Generator) -> TreeState:
    """
    Grow an explicit hyperrecursive tree for n steps

    Each step picks theta - 1 distinct existing vertices uniformly,
    raises their containment by one and appends a vertex at level 1.
    """
    HrtParams(theta, 1, n)
    containment = np.ones(n + theta, dtype=np.int64)
    size = theta
    for _ in range(n):
        chosen = rng.choice(size, size=theta - 1, replace=False)
        containment[chosen] += 1
        size += 1
    containment.setflags(write=False)
    return TreeState(containment, n)


def tree_profile(tree: TreeState, k: int) -> np.ndarray:
    """Lumped profile (X_1, ..., X_k, sum_{i>k} X_i) of an explicit tree"""
    histogram = np.bincount(tree.containment, minlength=k + 2)[1:]
    return np.concatenate([histogram[:k], [histogram[k:].sum()]]).astype(np.int64)


def stochastic_recurrence_step(profile: Sequence[int], sampled: Sequence[int]) -> np.ndarray:
    """
    Apply one step of the level recurrences to a lumped profile

    Level 1 gains the new vertex and loses its sampled vertices, level j
    gains the sampled vertices of level j-1 and loses its own; sampled
    vertices of the lumped level stay there.
    """
    profile = np.asarray(profile, dtype=np.int64)
    sampled = np.asarray(sampled, dtype=np.int64)
    updated = profile.copy()
    updated[0] += 1 - sampled[0]
    updated[1:-1] += sampled[:-2] - sampled[1:-1]
    updated[-1] += sampled[-2]
    return updated


def exact_tree_distribution(theta: int, n: int, k: int) -> ExactDistribution:
    """
    Exact law of the lumped profile by enumerating every uniform subset choice

    States are sorted tuples of containment counts, so vertices with equal
    counts are merged before branching.
    """
    HrtParams(theta, k, n)
    layer: Dict[Tuple[int, ...], Fraction] = {(1,) * theta: Fraction(1)}
    for _ in range(n):
        following: Dict[Tuple[int, ...], Fraction] = {}
        for counts, probability in layer.items():
            subsets = list(itertools.combinations(range(len(counts)), theta - 1))
            share = probability / len(subsets)
            for subset in subsets:
                grown = list(counts)
                for v in subset:
                    grown[v] += 1
                grown.append(1)
                key = tuple(sorted(grown))
                following[key] = following.get(key, Fraction(0)) + share
        layer = following

    support: Dict[Tuple[int, ...], Fraction] = {}
    for counts, probability in layer.items():
        histogram = np.bincount(np.asarray(counts), minlength=k + 2)[1:]
        key = tuple(int(c) for c in histogram[:k]) + (int(histogram[k:].sum()),)
        support[key] = support.get(key, Fraction(0)) + probability
    logger.debug("Tree enumeration theta=%d n=%d: %d multisets, %d profiles", theta, n, len(layer), len(support))
    return ExactDistribution(n=n, support=support)
