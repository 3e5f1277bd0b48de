"""
Replication Harness - Independent urn trajectories, moment estimates and simulation study records

Replication r always draws from the stream keyed by (master_seed, r), and
results are gathered in replication order, so the output does not depend
on the number of worker processes.
"""

from __future__ import annotations

import logging
import math
import sys
from collections import Counter
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .. import settings
from ..asymptotics import hrt_limit_covariance
from ..errors import InsufficientReplications
from ..models.hyperrecursive import grow_tree, leading_mean_vector, tree_profile
from ..oracle import ExactDistribution
from ..urn_core import UrnSpec, simulate_trajectory
from .normality import hz_test

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SimulationPlan:
    """R trajectories of n_draws steps, reporting the first tracked_levels colors"""

    spec: UrnSpec
    n_draws: int
    replications: int
    master_seed: int
    tracked_levels: int

    def __post_init__(self):
        if self.replications < 2:
            raise InsufficientReplications(f"Need at least 2 replications, got {self.replications}")
        if self.n_draws < 1:
            raise ValueError(f"n_draws must be at least 1, got {self.n_draws}")
        if not 1 <= self.tracked_levels <= self.spec.k:
            raise ValueError(f"tracked_levels must lie in 1..{self.spec.k}, got {self.tracked_levels}")


@dataclass
class MomentReport:
    """Scaled moment estimates across replications plus the HZ verdict"""

    mu_hat: np.ndarray
    sigma_hat: np.ndarray
    n: int
    replications: int
    hz_statistic: Optional[float] = None
    hz_p_value: Optional[float] = None
    seed: Optional[int] = None
    labels: Dict[str, int] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return int(self.mu_hat.size)

    def to_record(self) -> dict:
        """Flat CSV row: labels, k, n, R, seed, mu_i, sigma_i_j row-major, hz, p"""
        record = dict(self.labels)
        record.update({"k": self.k, "n": self.n, "R": self.replications, "seed": self.seed})
        for i, value in enumerate(self.mu_hat, start=1):
            record[f"mu_{i}"] = float(value)
        for i in range(self.k):
            for j in range(self.k):
                record[f"sigma_{i + 1}_{j + 1}"] = float(self.sigma_hat[i, j])
        record["hz"] = self.hz_statistic
        record["p"] = self.hz_p_value
        return record

    def to_json_dict(self) -> dict:
        document = dict(self.labels)
        document.update({
            "k": self.k,
            "n": self.n,
            "R": self.replications,
            "seed": self.seed,
            "mu_hat": [float(v) for v in self.mu_hat],
            "sigma_hat": [[float(v) for v in row] for row in self.sigma_hat],
            "hz": self.hz_statistic,
            "p": self.hz_p_value,
        })
        return document


def replication_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for replication `index`"""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(index,)))


def _replicate_block(task) -> np.ndarray:
    spec, n_draws, tracked, master_seed, indices = task
    block = np.empty((len(indices), tracked), dtype=np.int64)
    for row, index in enumerate(indices):
        state = simulate_trajectory(spec, n_draws, replication_rng(master_seed, index))
        block[row] = state.x[:tracked]
    return block


def _blocks(replications: int, size: int) -> List[range]:
    return [range(start, min(start + size, replications)) for start in range(0, replications, size)]


class ReplicationManager:
    """Runs a SimulationPlan, optionally across worker processes, reporting progress"""

    def __init__(self, plan: SimulationPlan, workers: int = settings.DEFAULT_WORKERS,
                 block_size: int = settings.REPLICATION_BLOCK):
        if workers < 1:
            raise ValueError(f"workers must be at least 1, got {workers}")
        self.plan = plan
        self.workers = workers
        self.block_size = block_size

        # Run status
        self.is_running = False
        self.completed = 0

        # Callback functions
        self.on_progress = None
        self.on_complete = None

    def set_callbacks(self, complete_callback=None, progress_callback=None):
        """Set run callback functions"""
        self.on_complete = complete_callback
        self.on_progress = progress_callback

    def _notify(self, callback: Optional[Callable], *args):
        if callback is None:
            return
        try:
            callback(*args)
        except Exception as callback_error:
            print(f"Replication callback error: {callback_error}", file=sys.stderr)

    def run(self) -> np.ndarray:
        """
        Execute every replication

        Returns:
            R x tracked_levels integer array, row r from replication r
        """
        plan = self.plan
        tasks = [
            (plan.spec, plan.n_draws, plan.tracked_levels, plan.master_seed, indices)
            for indices in _blocks(plan.replications, self.block_size)
        ]
        self.is_running = True
        self.completed = 0
        blocks = []
        try:
            self._notify(self.on_progress, f"Running {plan.replications} replications of {plan.n_draws} draws...")
            if self.workers == 1:
                results = map(_replicate_block, tasks)
                blocks = self._collect(results)
            else:
                with Pool(processes=self.workers) as pool:
                    blocks = self._collect(pool.imap(_replicate_block, tasks))
        finally:
            self.is_running = False

        samples = np.vstack(blocks)
        logger.info("Finished %d replications (seed=%d, workers=%d)", plan.replications, plan.master_seed, self.workers)
        self._notify(self.on_complete, samples)
        return samples

    def _collect(self, results) -> List[np.ndarray]:
        blocks = []
        for block in results:
            blocks.append(block)
            self.completed += len(block)
            self._notify(self.on_progress, f"Replications done: {self.completed}/{self.plan.replications}")
        return blocks


def run_replications(plan: SimulationPlan, workers: int = settings.DEFAULT_WORKERS,
                     progress_callback: Optional[Callable[[str], None]] = None) -> np.ndarray:
    """Final count vectors (first tracked_levels colors) in replication order"""
    manager = ReplicationManager(plan, workers)
    manager.set_callbacks(progress_callback=progress_callback)
    return manager.run()


def estimate_moments(samples, n: int) -> MomentReport:
    """
    Mean of X_n / n and unbiased sample covariance of X_n divided by n

    Raises:
        InsufficientReplications: If fewer than two samples
    """
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise InsufficientReplications(f"Need at least 2 samples, got {X.shape[0]}")
    mu_hat = X.mean(axis=0) / n
    sigma_hat = np.atleast_2d(np.cov(X, rowvar=False, ddof=1)) / n
    sigma_hat = (sigma_hat + sigma_hat.T) / 2
    return MomentReport(mu_hat=mu_hat, sigma_hat=sigma_hat, n=n, replications=X.shape[0])


def simulate_moments(plan: SimulationPlan, workers: int = settings.DEFAULT_WORKERS,
                     progress_callback: Optional[Callable[[str], None]] = None,
                     labels: Optional[Dict[str, int]] = None) -> Tuple[MomentReport, np.ndarray]:
    """Run the plan, estimate the moments and attach the HZ statistic of the raw vectors"""
    samples = run_replications(plan, workers, progress_callback)
    report = estimate_moments(samples, plan.n_draws)
    result = hz_test(samples)
    report.hz_statistic = result.statistic
    report.hz_p_value = result.p_value
    report.seed = plan.master_seed
    report.labels = dict(labels or {})
    return report, samples


def run_tree_replications(theta: int, n: int, replications: int, master_seed: int, k: int) -> np.ndarray:
    """Explicit-tree counterpart of run_replications, same stream per replication"""
    if replications < 2:
        raise InsufficientReplications(f"Need at least 2 replications, got {replications}")
    profiles = np.empty((replications, k), dtype=np.int64)
    for r in range(replications):
        tree = grow_tree(theta, n, replication_rng(master_seed, r))
        profiles[r] = tree_profile(tree, k)[:k]
    return profiles


def empirical_frequencies(samples) -> Dict[Tuple[int, ...], float]:
    """Relative frequency of every distinct count vector"""
    rows = [tuple(int(v) for v in row) for row in np.atleast_2d(np.asarray(samples))]
    counts = Counter(rows)
    return {x: c / len(rows) for x, c in counts.items()}


def multinomial_band_check(freqs: Dict[Tuple[int, ...], float], dist: ExactDistribution,
                           replications: int, z: float = 4.0) -> bool:
    """
    Every exact atom's frequency within z binomial standard deviations

    A slack of one count (1/R) absorbs single hits on very rare atoms.
    Vectors seen in the simulation but absent from the exact support fail.
    """
    for x in freqs:
        if dist.probability(x) == 0:
            logger.info("Simulated vector %s is outside the exact support", x)
            return False
    for x, p in dist.support.items():
        p = float(p)
        spread = z * math.sqrt(p * (1 - p) / replications) + 1 / replications
        if abs(freqs.get(x, 0.0) - p) > spread:
            logger.info("Vector %s: frequency %.5f vs probability %.5f", x, freqs.get(x, 0.0), p)
            return False
    return True


def study_row(theta: int, report: MomentReport, k: Optional[int] = None) -> dict:
    """Theoretical mu and Sigma next to the estimates for one hyperedge size"""
    k = report.k if k is None else k
    mu = leading_mean_vector(theta, k)
    sigma = hrt_limit_covariance(theta, k)
    record = {"theta": theta}
    record.update({key: value for key, value in report.to_record().items() if key != "theta"})
    for i in range(k):
        record[f"mu_{i + 1}_theory"] = float(mu[i])
    for i in range(k):
        for j in range(k):
            record[f"sigma_{i + 1}_{j + 1}_theory"] = float(sigma[i, j])
    return record
