"""
Oracle - Exact finite-n distribution of a small affine urn by forward enumeration
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from . import settings
from .errors import StateSpaceExceeded
from .urn_core import UrnSpec, UrnState, feasible_samples, replacement_for_sample

logger = logging.getLogger(__name__)

CountVector = Tuple[int, ...]


@dataclass
class ExactDistribution:
    """Law of the count vector after n draws, probabilities as Fractions"""

    n: int
    support: Dict[CountVector, Fraction] = field(default_factory=dict)

    def total_probability(self) -> Fraction:
        return sum(self.support.values(), Fraction(0))

    def probability(self, x) -> Fraction:
        return self.support.get(tuple(int(v) for v in x), Fraction(0))

    def marginal(self, coordinates: int) -> "ExactDistribution":
        """Law of the first `coordinates` entries"""
        merged: Dict[CountVector, Fraction] = {}
        for x, p in self.support.items():
            key = x[:coordinates]
            merged[key] = merged.get(key, Fraction(0)) + p
        return ExactDistribution(self.n, merged)

    def to_json_dict(self) -> dict:
        atoms = sorted(self.support.items(), key=lambda item: item[0], reverse=True)
        return {
            "n": self.n,
            "support": [
                {"x": list(x), "p": f"{p.numerator}/{p.denominator}"} for x, p in atoms
            ],
        }


def support_bound(spec: UrnSpec, n: int) -> int:
    """Count vectors with k entries summing to tau_n; bounds the support size"""
    return math.comb(spec.total_at(n) + spec.k - 1, spec.k - 1)


def largest_enumerable_n(spec: UrnSpec, cap: int) -> int:
    n = 0
    while support_bound(spec, n + 1) <= cap:
        n += 1
    return n


def exact_distribution(spec: UrnSpec, n: int, cap: int = settings.ORACLE_STATE_CAP) -> ExactDistribution:
    """
    Forward dynamic program over draws

    Every state of layer j carries an integer weight over the common
    denominator prod_{i<j} C(tau_i, s), so pmf products stay in integers
    until the final layer is converted to Fractions.

    Args:
        spec: Urn to expand
        n: Number of draws
        cap: Largest admissible support bound

    Raises:
        StateSpaceExceeded: If the support bound at n exceeds cap
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if support_bound(spec, n) > cap:
        raise StateSpaceExceeded(requested_n=n, attained_n=largest_enumerable_n(spec, cap), cap=cap)

    layer: Dict[CountVector, int] = {tuple(spec.x0.tolist()): 1}
    denominator = 1
    replacements = {}
    for j in range(n):
        tau = spec.total_at(j)
        draw_denominator = math.comb(tau, spec.s)
        following: Dict[CountVector, int] = {}
        for x, weight in layer.items():
            state = UrnState(x, tau, j)
            for q in feasible_samples(state, spec.s):
                ways = 1
                for xi, qi in zip(x, q):
                    ways *= math.comb(xi, qi)
                if q not in replacements:
                    replacements[q] = replacement_for_sample(spec, q).tolist()
                key = tuple(xi + ai for xi, ai in zip(x, replacements[q]))
                following[key] = following.get(key, 0) + weight * ways
        layer = following
        denominator *= draw_denominator
        logger.debug("Oracle layer %d: %d states", j + 1, len(layer))

    support = {x: Fraction(weight, denominator) for x, weight in layer.items()}
    return ExactDistribution(n=n, support=support)


def exact_moments(dist: ExactDistribution) -> Tuple[List[Fraction], List[List[Fraction]]]:
    """Exact mean vector and covariance matrix"""
    atoms = list(dist.support.items())
    k = len(atoms[0][0])
    mean = [sum((p * x[i] for x, p in atoms), Fraction(0)) for i in range(k)]
    covariance = [
        [sum((p * (x[i] - mean[i]) * (x[j] - mean[j]) for x, p in atoms), Fraction(0)) for j in range(k)]
        for i in range(k)
    ]
    return mean, covariance
