"""
Command Line Interface - Spectral analysis, simulation, exact means and oracle cross-checks
for the hyperrecursive tree profile urn
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from . import settings
from .asymptotics import compare_methods, cov3_closed_form, spectral_analysis
from .errors import HyperurnError
from .models.hyperrecursive import (
    HyperrecursiveTreeModel,
    asymptotic_mean,
    exact_mean_levels12,
    exact_mean_vector,
    leading_mean_vector,
)
from .montecarlo.replications import (
    SimulationPlan,
    empirical_frequencies,
    multinomial_band_check,
    run_replications,
    simulate_moments,
    study_row,
)
from .oracle import exact_distribution, exact_moments

COMMAND_NAMES = ("analyze", "simulate", "exact", "oracle-check")
FORMATS = ("json", "csv", "table")


@dataclass(frozen=True)
class RunConfig:
    """Parsed command-line flags"""

    command: str
    theta: int = 2
    k: int = 3
    n: int = settings.DEFAULT_DRAWS
    reps: int = settings.DEFAULT_REPLICATIONS
    seed: int = settings.DEFAULT_SEED
    format: str = "table"
    out: Optional[Path] = None
    workers: int = settings.DEFAULT_WORKERS
    cap: int = settings.ORACLE_STATE_CAP
    verbose: bool = False


@dataclass
class CommandResult:
    """Machine document, CSV frame and titled tables of one command run"""

    document: dict
    frame: pd.DataFrame
    tables: List[Tuple[str, pd.DataFrame]] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@contextmanager
def _unbounded_int_digits():
    """Lift the int to str digit limit (Python 3.10.7+) for the duration of the block"""
    if not hasattr(sys, "set_int_max_str_digits"):
        yield
        return
    previous = sys.get_int_max_str_digits()
    sys.set_int_max_str_digits(0)
    try:
        yield
    finally:
        sys.set_int_max_str_digits(previous)


def rational(value) -> str:
    """Fraction as num/den; exact means near n = 10^4 run to thousands of digits"""
    value = Fraction(value)
    with _unbounded_int_digits():
        return f"{value.numerator}/{value.denominator}"


def _status(message: str):
    print(message, file=sys.stderr)


def _document(config: RunConfig, **payload) -> dict:
    document = {"schema": settings.SCHEMA_VERSION, "command": config.command,
                "theta": config.theta, "k": config.k}
    document.update(payload)
    return document


def _eigenvalue_entries(eigenvalues: np.ndarray) -> list:
    entries = []
    for value in eigenvalues:
        if abs(value.imag) < 1e-12:
            entries.append(float(value.real))
        else:
            entries.append([float(value.real), float(value.imag)])
    return entries


def cmd_analyze(config: RunConfig) -> CommandResult:
    """Core matrix, spectrum, v1 and Sigma by both methods, with the closed form for k >= 3"""
    spec = HyperrecursiveTreeModel(config.theta, config.k).urn()
    spectral = spectral_analysis(spec.A, spec.b)
    sylvester, quadrature, disagreement = compare_methods(spec.A, spec.b, spec.s, spectral.v1)
    sigma = sylvester.sigma

    failures = []
    if disagreement > settings.METHOD_AGREEMENT_TOL:
        failures.append(f"Sylvester and quadrature Sigma disagree by {disagreement:.3e}")
    if sylvester.symmetry_error > settings.SYMMETRY_TOL:
        failures.append(f"Sigma asymmetric by {sylvester.symmetry_error:.3e}")
    if sylvester.min_eigenvalue < -settings.PSD_TOL:
        failures.append(f"Sigma has negative eigenvalue {sylvester.min_eigenvalue:.3e}")
    if sylvester.balanced_direction_error > settings.BALANCED_DIRECTION_TOL:
        failures.append(f"Sigma @ 1 is {sylvester.balanced_direction_error:.3e}, expected 0")

    size = spec.k
    rows = []
    for i in range(size):
        for j in range(size):
            rows.append({
                "i": i + 1,
                "j": j + 1,
                "sigma_sylvester": float(sigma[i, j]),
                "sigma_quadrature": float(quadrature.sigma[i, j]),
            })
    frame = pd.DataFrame(rows)

    closed_form = None
    if config.k >= 3:
        closed_form = cov3_closed_form(config.theta)
        frame["sigma_closed_form"] = [
            float(closed_form[r["i"] - 1, r["j"] - 1]) if r["i"] <= 3 and r["j"] <= 3 else np.nan
            for r in rows
        ]

    document = _document(
        config,
        core_matrix=spec.A.tolist(),
        sample_size=spec.s,
        balance=spec.b,
        eigenvalues=_eigenvalue_entries(spectral.eigenvalues),
        core_index=spectral.core_index,
        regime=spectral.regime,
        v1=[float(v) for v in spectral.v1],
        sigma_sylvester=sigma.tolist(),
        sigma_quadrature=quadrature.sigma.tolist(),
        sylvester_residual=sylvester.residual,
        quadrature_residual=quadrature.residual,
        quadrature_horizon=quadrature.horizon,
        method_disagreement=disagreement,
        cov3_closed_form=None if closed_form is None else closed_form.tolist(),
        passed=not failures,
    )

    labels = [f"level_{i}" for i in range(1, config.k + 1)] + ["lumped"]
    tables = [
        ("Core matrix", pd.DataFrame(spec.A, index=labels, columns=labels)),
        ("Spectrum", pd.DataFrame({
            "eigenvalue": [complex(v).real for v in spectral.eigenvalues],
            "v1": spectral.v1,
        }, index=labels)),
        ("Limiting covariance", frame),
    ]
    return CommandResult(document=document, frame=frame, tables=tables, failures=failures)


def cmd_simulate(config: RunConfig) -> CommandResult:
    """Replicated urn runs with estimated and theoretical moments side by side"""
    spec = HyperrecursiveTreeModel(config.theta, config.k).urn()
    plan = SimulationPlan(spec=spec, n_draws=config.n, replications=config.reps,
                          master_seed=config.seed, tracked_levels=config.k)
    _status(f"🎲 Simulating theta={config.theta}: {config.reps} replications of {config.n} draws")
    progress = _status if config.verbose else None
    report, _ = simulate_moments(plan, workers=config.workers, progress_callback=progress,
                                 labels={"theta": config.theta})
    record = study_row(config.theta, report)

    mu = leading_mean_vector(config.theta, config.k)
    document = _document(
        config,
        report=report.to_json_dict(),
        theory={
            "mu": [float(v) for v in mu],
            "sigma": [[record[f"sigma_{i}_{j}_theory"] for j in range(1, config.k + 1)]
                      for i in range(1, config.k + 1)],
        },
    )

    levels = range(1, config.k + 1)
    means = pd.DataFrame({
        "level": list(levels),
        "mu_hat": [record[f"mu_{i}"] for i in levels],
        "mu_theory": [record[f"mu_{i}_theory"] for i in levels],
    })
    covariances = pd.DataFrame([
        {"i": i, "j": j, "sigma_hat": record[f"sigma_{i}_{j}"], "sigma_theory": record[f"sigma_{i}_{j}_theory"]}
        for i in levels for j in levels if j >= i
    ])
    normality = pd.DataFrame([{"hz": report.hz_statistic, "p": report.hz_p_value}])
    tables = [("Means", means), ("Covariances", covariances), ("Henze-Zirkler", normality)]
    return CommandResult(document=document, frame=pd.DataFrame([record]), tables=tables)


def cmd_exact(config: RunConfig) -> CommandResult:
    """Exact E[X_{n,i}] next to the leading-order asymptotic mean"""
    means = exact_mean_vector(config.n, config.theta, config.k)
    is_rational = isinstance(means[0], Fraction)
    closed = exact_mean_levels12(config.n, config.theta)

    rows = []
    entries = []
    for i in range(1, config.k + 1):
        value = means[i - 1]
        approx = asymptotic_mean(config.n, config.theta, i)
        entry = {
            "level": i,
            "exact": rational(value) if is_rational else float(value),
            "asymptotic": approx,
            "difference": float(value) - approx,
        }
        if i <= 2:
            closed_value = closed[i - 1]
            entry["closed_form"] = rational(closed_value) if isinstance(closed_value, Fraction) else float(closed_value)
        entries.append(entry)
        rows.append({"level": i, "exact": float(value), "asymptotic": approx, "difference": float(value) - approx})

    document = _document(config, n=config.n, rational=is_rational, levels=entries)
    frame = pd.DataFrame(rows)
    if is_rational:
        frame.insert(2, "exact_rational", [rational(means[i]) for i in range(config.k)])
    return CommandResult(document=document, frame=frame, tables=[(f"Mean profile at n={config.n}", frame)])


def cmd_oracle_check(config: RunConfig) -> CommandResult:
    """Exact law against the mean recursion, the level 1-2 formula and a seeded simulation"""
    spec = HyperrecursiveTreeModel(config.theta, config.k).urn()
    _status(f"🔍 Enumerating the exact law at n={config.n}")
    dist = exact_distribution(spec, config.n, cap=config.cap)
    mean, _ = exact_moments(dist)

    checks = []
    total = dist.total_probability()
    checks.append(("total_probability", total == 1, f"sum of probabilities {rational(total)}"))

    recursion = exact_mean_vector(config.n, config.theta, config.k, exact=True)
    mismatch = [i + 1 for i, (a, b) in enumerate(zip(mean, recursion)) if a != b]
    checks.append(("mean_recursion", not mismatch,
                   f"oracle mean {[rational(v) for v in mean]} vs recursion "
                   f"{[rational(v) for v in recursion]}" if mismatch else "all coordinates equal"))

    closed = exact_mean_levels12(config.n, config.theta)
    compared = 2 if config.k >= 2 else 1
    if isinstance(closed[0], Fraction):
        agree = all(mean[i] == closed[i] for i in range(compared))
    else:
        agree = all(abs(float(mean[i]) - closed[i]) <= 1e-9 * max(1.0, abs(closed[i])) for i in range(compared))
    checks.append(("level12_formula", agree,
                   f"oracle {[str(mean[i]) for i in range(compared)]} vs formula "
                   f"{[str(closed[i]) for i in range(compared)]}"))

    if config.n >= 1:
        _status(f"🎲 Simulating {config.reps} trajectories (seed {config.seed})")
        plan = SimulationPlan(spec=spec, n_draws=config.n, replications=config.reps,
                              master_seed=config.seed, tracked_levels=spec.k)
        samples = run_replications(plan, workers=config.workers)
        within = multinomial_band_check(empirical_frequencies(samples), dist, config.reps)
        checks.append(("simulation_band", within,
                       f"{len(dist.support)} atoms within 4 binomial standard deviations" if within
                       else "empirical frequencies fall outside the 4-sigma band"))

    frame = pd.DataFrame([{"check": name, "passed": bool(ok), "detail": detail} for name, ok, detail in checks])
    failures = [f"{name}: {detail}" for name, ok, detail in checks if not ok]
    document = _document(
        config,
        n=config.n,
        support_size=len(dist.support),
        checks=[{"check": name, "passed": bool(ok), "detail": detail} for name, ok, detail in checks],
        exact_mean=[rational(v) for v in mean],
        passed=not failures,
    )
    return CommandResult(document=document, frame=frame, tables=[("Oracle checks", frame)], failures=failures)


COMMANDS: Dict[str, Callable[[RunConfig], CommandResult]] = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "oracle-check": cmd_oracle_check,
}


def render(result: CommandResult, output_format: str) -> str:
    if output_format == "json":
        return json.dumps(result.document, indent=2) + "\n"
    if output_format == "csv":
        return result.frame.to_csv(index=False)
    blocks = []
    for title, table in result.tables:
        blocks.append(f"{title}\n{table.round(settings.TABLE_DECIMALS).to_string()}")
    return "\n\n".join(blocks) + "\n"


def emit(result: CommandResult, config: RunConfig):
    text = render(result, config.format)
    if config.out is None:
        sys.stdout.write(text)
        return
    config.out.write_text(text, encoding="utf-8")
    _status(f"💾 Wrote {config.format} output to {config.out}")


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--theta", type=int, default=2, help="Hyperedge size (>= 2)")
    shared.add_argument("--k", type=int, default=3, help="Tracked containment levels (>= 1)")
    shared.add_argument("--format", choices=FORMATS, default="table", help="Output format")
    shared.add_argument("--out", type=Path, default=None, help="Write output to this file instead of stdout")
    shared.add_argument("--verbose", action="store_true", help="Log library diagnostics")

    parser = argparse.ArgumentParser(
        prog="hyperurn",
        description="Affine urn analysis of hyperrecursive tree containment profiles",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Example usage:
  hyperurn analyze --theta 2 --k 3
  hyperurn simulate --theta 5 --n 2000 --reps 1000 --seed 4706 --format json
  hyperurn exact --theta 2 --n 3
  hyperurn oracle-check --theta 3 --k 3 --n 5
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("analyze", parents=[shared], help="Spectrum and limiting covariance")

    simulate = commands.add_parser("simulate", parents=[shared], help="Monte Carlo moments and HZ test")
    simulate.add_argument("--n", type=int, default=settings.DEFAULT_DRAWS, help="Draws per trajectory")
    simulate.add_argument("--reps", type=int, default=settings.DEFAULT_REPLICATIONS, help="Replications")
    simulate.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="Master seed")
    simulate.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS, help="Worker processes")

    exact = commands.add_parser("exact", parents=[shared], help="Exact and asymptotic mean profile")
    exact.add_argument("--n", type=int, required=True, help="Tree age")

    oracle = commands.add_parser("oracle-check", parents=[shared], help="Cross-check the exact law")
    oracle.add_argument("--n", type=int, required=True, help="Tree age")
    oracle.add_argument("--reps", type=int, default=2000, help="Simulated trajectories")
    oracle.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="Master seed")
    oracle.add_argument("--cap", type=int, default=settings.ORACLE_STATE_CAP, help="Largest admissible support bound")
    oracle.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS, help="Worker processes")
    return parser


def config_from_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> RunConfig:
    """Validate parsed flags; violations exit with status 2 through parser.error"""
    if args.theta < 2:
        parser.error(f"--theta must be at least 2, got {args.theta}")
    if args.k < 1:
        parser.error(f"--k must be at least 1, got {args.k}")
    n = getattr(args, "n", settings.DEFAULT_DRAWS)
    if n < 0:
        parser.error(f"--n must be nonnegative, got {n}")
    workers = getattr(args, "workers", settings.DEFAULT_WORKERS)
    if workers < 1:
        parser.error(f"--workers must be at least 1, got {workers}")
    return RunConfig(
        command=args.command,
        theta=args.theta,
        k=args.k,
        n=n,
        reps=getattr(args, "reps", settings.DEFAULT_REPLICATIONS),
        seed=getattr(args, "seed", settings.DEFAULT_SEED),
        format=args.format,
        out=args.out,
        workers=workers,
        cap=getattr(args, "cap", settings.ORACLE_STATE_CAP),
        verbose=args.verbose,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; returns 0 on success, 1 on errors or failed checks"""
    parser = build_parser()
    args = parser.parse_args(argv)
    config = config_from_args(parser, args)

    logging.basicConfig(
        level=logging.INFO if config.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        result = COMMANDS[config.command](config)
        emit(result, config)
    except HyperurnError as e:
        _status(f"❌ {type(e).__name__}: {e}")
        return 1
    except OSError as e:
        _status(f"❌ Cannot write {config.out}: {e}")
        return 1

    if not result.passed:
        _status(f"❌ Check failed: {result.failures[0]}")
        return 1
    _status(f"✅ {config.command} completed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
