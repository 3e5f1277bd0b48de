"""
Urn Core - Balanced affine urn with multiple drawings

A k-color urn draws an unordered sample of s balls without replacement,
then adds the replacement row a_q = (q @ A) / s, where row i of the core
matrix A is the replacement for an all-color-i sample.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ExhaustedUrn,
    InfeasibleSample,
    InsufficientInitial,
    NonAffine,
    UnbalancedMatrix,
    Untenable,
)

logger = logging.getLogger(__name__)

# A sample q: k nonnegative integers summing to s
SampleVector = Union[np.ndarray, Tuple[int, ...]]


def _frozen_int_array(values, name: str) -> np.ndarray:
    array = np.asarray(values)
    if array.dtype.kind == "f":
        if not np.all(np.equal(np.mod(array, 1), 0)):
            raise ValueError(f"{name} must hold integers, got {array.tolist()}")
    elif array.dtype.kind not in "iu":
        raise ValueError(f"{name} must hold integers, got dtype {array.dtype}")
    array = array.astype(np.int64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class UrnSpec:
    """Validated balanced affine urn; build it with new_urn"""

    A: np.ndarray
    s: int
    b: int
    x0: np.ndarray

    @property
    def k(self) -> int:
        return int(self.A.shape[0])

    @property
    def tau0(self) -> int:
        return int(self.x0.sum())

    def total_at(self, n: int) -> int:
        """Number of balls after n draws"""
        return self.b * n + self.tau0

    def initial_state(self) -> "UrnState":
        return UrnState(self.x0, self.tau0, 0)


@dataclass(frozen=True, eq=False)
class UrnState:
    """Ball counts x after n draws, with total tau"""

    x: np.ndarray
    tau: int
    n: int

    def __post_init__(self):
        x = _frozen_int_array(self.x, "x")
        if np.any(x < 0):
            raise ValueError(f"Negative ball count in {x.tolist()}")
        if int(x.sum()) != self.tau:
            raise ValueError(f"Counts {x.tolist()} do not sum to tau={self.tau}")
        object.__setattr__(self, "x", x)


def simplex(s: int, k: int) -> Iterator[Tuple[int, ...]]:
    """
    Enumerate the discrete simplex of samples of size s over k colors

    Order is lexicographic with s_1 descending first, so (s, 0, ..., 0)
    comes first and (0, ..., 0, s) last.
    """
    if k == 1:
        yield (s,)
        return
    for first in range(s, -1, -1):
        for rest in simplex(s - first, k - 1):
            yield (first,) + rest


def simplex_size(s: int, k: int) -> int:
    return math.comb(s + k - 1, k - 1)


def new_urn(A, s: int, x0) -> UrnSpec:
    """
    Validate a core matrix, sample size and initial counts

    Args:
        A: k x k integer core matrix, row i is the replacement for s balls of color i
        s: Sample size per draw
        x0: Initial ball counts (k nonnegative integers)

    Returns:
        UrnSpec: Validated urn with balance b inferred from the row sums

    Raises:
        UnbalancedMatrix, NonAffine, Untenable, InsufficientInitial
    """
    A = _frozen_int_array(A, "A")
    x0 = _frozen_int_array(x0, "x0")

    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"Core matrix must be square, got shape {A.shape}")
    k = A.shape[0]
    if k < 2:
        raise ValueError(f"Need at least 2 colors, got {k}")
    if int(s) != s or s < 1:
        raise ValueError(f"Sample size must be a positive integer, got {s}")
    s = int(s)
    if x0.shape != (k,):
        raise ValueError(f"Initial counts need {k} entries, got {x0.tolist()}")
    if np.any(x0 < 0):
        raise ValueError(f"Initial counts must be nonnegative, got {x0.tolist()}")

    row_sums = A.sum(axis=1)
    if np.any(row_sums != row_sums[0]):
        raise UnbalancedMatrix(f"Core matrix row sums differ: {row_sums.tolist()}")
    b = int(row_sums[0])

    for q in simplex(s, k):
        numerator = np.asarray(q, dtype=np.int64) @ A
        if np.any(numerator % s != 0):
            fractional = [str(Fraction(int(v), s)) for v in numerator]
            raise NonAffine(f"Sample {q} gives fractional replacement ({', '.join(fractional)})")
        replacement = numerator // s
        if np.any(replacement < -np.asarray(q)):
            raise Untenable(
                f"Sample {q} removes more balls than drawn: replacement {replacement.tolist()}"
            )

    if int(x0.sum()) < s:
        raise InsufficientInitial(f"Initial total {int(x0.sum())} is below sample size {s}")

    zero_columns = np.flatnonzero(~A.any(axis=0))
    if zero_columns.size:
        warnings.warn(
            f"Core matrix has zero column(s) {zero_columns.tolist()}; urn may be reducible",
            stacklevel=2,
        )

    logger.debug("Validated %d-color urn: s=%d, b=%d, |simplex|=%d", k, s, b, simplex_size(s, k))
    return UrnSpec(A=A, s=s, b=b, x0=x0)


def replacement_for_sample(spec: UrnSpec, q: SampleVector) -> np.ndarray:
    """Replacement a_q = sum_i (q_i / s) * (row i of A); q must lie in the simplex"""
    return (np.asarray(q, dtype=np.int64) @ spec.A) // spec.s


def replacement_matrix(spec: UrnSpec) -> np.ndarray:
    """Full |simplex| x k replacement matrix, rows in simplex order"""
    return np.array([replacement_for_sample(spec, q) for q in simplex(spec.s, spec.k)], dtype=np.int64)


def sample_pmf(state: UrnState, q: SampleVector, exact: bool = False) -> Union[float, Fraction]:
    """
    Multivariate hypergeometric probability of drawing q from state

    The multinomial coefficient times the falling-factorial ratio
    collapses to prod_i C(x_i, q_i) / C(tau, s).
    """
    q = np.asarray(q, dtype=np.int64)
    if np.any(q < 0) or np.any(q > state.x):
        raise InfeasibleSample(f"Sample {q.tolist()} not drawable from {state.x.tolist()}")
    numerator = 1
    for xi, qi in zip(state.x.tolist(), q.tolist()):
        numerator *= math.comb(xi, qi)
    denominator = math.comb(state.tau, int(q.sum()))
    if exact:
        return Fraction(numerator, denominator)
    return numerator / denominator


def feasible_samples(state: UrnState, s: int) -> Iterator[Tuple[int, ...]]:
    """Samples of the simplex that the state can supply"""
    counts = state.x.tolist()
    for q in simplex(s, len(counts)):
        if all(qi <= xi for qi, xi in zip(q, counts)):
            yield q


def draw_sample(state: UrnState, s: int, rng: np.random.Generator) -> np.ndarray:
    """
    Draw an unordered sample of s balls without replacement

    Colors are drawn one after another from univariate hypergeometric laws
    conditioned on the remaining pool, which reproduces the joint
    multivariate hypergeometric law.
    """
    if state.tau < s:
        raise ExhaustedUrn(f"Urn holds {state.tau} balls, sample needs {s}")
    return rng.multivariate_hypergeometric(state.x, s, method="marginals")


def step(state: UrnState, spec: UrnSpec, rng: np.random.Generator) -> UrnState:
    """One draw: x' = x + a_q, tau' = tau + b, n' = n + 1"""
    q = draw_sample(state, spec.s, rng)
    return UrnState(state.x + replacement_for_sample(spec, q), state.tau + spec.b, state.n + 1)


def simulate_trajectory(spec: UrnSpec, n: int, rng: np.random.Generator,
                        state: Optional[UrnState] = None) -> UrnState:
    """Run n draws starting from state (initial state by default)"""
    state = spec.initial_state() if state is None else state
    for _ in range(n):
        state = step(state, spec, rng)
    return state


def expected_sample(state: UrnState, s: int, exact: bool = False):
    """E[Q | x] = s * x / tau"""
    if exact:
        return [Fraction(s * xi, state.tau) for xi in state.x.tolist()]
    return s * state.x / state.tau


def conditional_mean(state: UrnState, spec: UrnSpec, exact: bool = False) -> Union[np.ndarray, List[Fraction]]:
    """
    One-step conditional expectation x (I + A / tau)

    Args:
        state: Current urn state (tau >= s)
        spec: Urn specification
        exact: Return Fractions instead of floats

    Returns:
        Expected counts after the next draw
    """
    if exact:
        counts = state.x.tolist()
        rows = spec.A.tolist()
        return [
            Fraction(counts[j]) + Fraction(sum(counts[i] * rows[i][j] for i in range(spec.k)), state.tau)
            for j in range(spec.k)
        ]
    return state.x + (state.x @ spec.A) / state.tau


def mean_replacement(state: UrnState, spec: UrnSpec) -> List[Fraction]:
    """sum_q pmf(q) * a_q over feasible samples, in exact arithmetic"""
    total = [Fraction(0)] * spec.k
    for q in feasible_samples(state, spec.s):
        p = sample_pmf(state, q, exact=True)
        a = replacement_for_sample(spec, q).tolist()
        total = [t + p * ai for t, ai in zip(total, a)]
    return total


def validate_state(state: UrnState, spec: UrnSpec) -> None:
    """Check that state is consistent with spec's balance"""
    if state.x.shape != (spec.k,):
        raise ValueError(f"State has {state.x.size} colors, urn has {spec.k}")
    if state.tau != spec.total_at(state.n):
        raise ValueError(f"tau={state.tau} but balance gives {spec.total_at(state.n)} at n={state.n}")


def as_state(x: Sequence[int], n: int = 0) -> UrnState:
    """Convenience constructor from a count vector"""
    x = np.asarray(x, dtype=np.int64)
    return UrnState(x, int(x.sum()), n)
