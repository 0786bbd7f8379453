"""Monte Carlo harness: seeded experiment runs, sweeps, CSV reports.

A trial is one full learner run for the configured problem; the empirical
rate is the fraction of trials recovering the true secret.  Each trial gets
its own counter-based RNG stream keyed by seed XOR trial-index, so reports
are bit-identical regardless of how trials are partitioned or interleaved.

Where a closed form exists, the report also carries the exact per-iteration
success probability and the closed-constant and gamma-optimized lower bounds:

  problem      exact_probability
  lwe, lpn     expected single-attempt success over fresh error draws
  lwr          deterministic single-attempt success of the rounding spec
  sis          product over coordinates of (1 - q^-L)^(wrong candidates tried first)
  ring-global  ((q-1)/q)^n

Reports serialize to CSV with the fixed header ``CSV_HEADER``; the wall-time
column is execution-dependent and excluded from the canonical (reproducible)
serialization used by the determinism tests.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .dense import MAX_AMPLITUDES
from .field import FieldParams, ParameterError
from .learners import (
    LearnerConfig,
    lpn_learn,
    lwe_learn,
    lwr_learn,
    lwr_sample_spec,
    sis_learn,
    sis_sample_stream,
)
from .ring import RingEmbedding, ring_lwe_global_learn, ring_sample_stream
from .samples import NoiseModel, outcome_distribution, sample_stream, theoretical_bound

CSV_COLUMNS = (
    "problem", "q", "n", "v", "k", "noise", "engine", "L", "M", "p",
    "trials", "seed", "empirical_rate", "wilson_lo", "wilson_hi",
    "exact_prob", "bound_paper", "bound_optimized", "wall_time_ms",
)
CSV_HEADER = ",".join(CSV_COLUMNS)

PROBLEMS = ("lwe", "lpn", "lwr", "sis", "ring-global")

_Z95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """95% Wilson score interval; robust at small success probabilities."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)  # exact at the edges
    return lo, hi


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: problem, instance parameters, trial count, seed."""

    problem: str
    q: int
    n: int
    trials: int
    seed: int
    engine: str = "analytic"
    noise: NoiseModel = NoiseModel.none()
    v: int | None = None
    s: tuple[int, ...] | None = None  # fixed secret; None draws one from the seed
    L: int = 1
    M: int = 0
    k: int | None = None  # candidate-test / SIS coefficient bound; defaults to the noise bound
    p: int | None = None  # LWR rounding modulus
    m: int | None = None  # ring conductor
    workers: int = 1

    def __post_init__(self) -> None:
        if self.problem not in PROBLEMS:
            raise ParameterError(f"unknown problem {self.problem!r}")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if self.engine not in ("dense", "analytic"):
            raise ParameterError(f"unknown engine {self.engine!r}")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")

    @property
    def effective_v(self) -> int:
        return self.q**self.n if self.v is None else self.v

    @property
    def effective_k(self) -> int:
        return self.noise.magnitude_bound() if self.k is None else self.k


@dataclasses.dataclass
class ExperimentReport:
    """Aggregated result of one experiment configuration."""

    config: ExperimentConfig
    successes: int
    trials: int
    empirical_rate: float
    wilson_lo: float
    wilson_hi: float
    exact_probability: float | None
    bound_paper: float | None
    bound_optimized: float | None
    wall_time_ms: float
    error: str | None = None

    def csv_row(self) -> list[str]:
        c = self.config
        fmt = lambda x: "" if x is None else repr(float(x))
        return [
            c.problem, str(c.q), str(c.n), str(c.effective_v), str(c.effective_k),
            str(c.noise), c.engine, str(c.L), str(c.M),
            "" if c.p is None else str(c.p), str(self.trials), str(c.seed),
            repr(self.empirical_rate), repr(self.wilson_lo), repr(self.wilson_hi),
            fmt(self.exact_probability), fmt(self.bound_paper), fmt(self.bound_optimized),
            repr(self.wall_time_ms),
        ]

    def canonical_text(self) -> str:
        """Deterministic serialization: every field except the wall clock."""
        row = self.csv_row()
        lines = [f"{name}: {value}" for name, value in zip(CSV_COLUMNS, row) if name != "wall_time_ms"]
        if self.error is not None:
            lines.append(f"error: {self.error}")
        return "\n".join(lines)

    def to_text(self) -> str:
        return self.canonical_text() + f"\nwall_time_ms: {self.wall_time_ms:.3f}"


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed ^ index) & (2**64 - 1)))


def _expected_iteration_success(q: int, n: int, v: int, noise: NoiseModel) -> float:
    """E over error draws of the exact single-attempt success probability."""
    values, weights = noise.distribution(q)
    if noise.is_global or noise.kind == "none":
        expected_sq = float(v) * v
    else:
        sp2 = math.fsum(w * w for w in weights)
        expected_sq = v * v * sp2 + v * (1.0 - sp2)
    return (q * expected_sq - float(v) * v) / (float(v) * float(q) ** (n + 1))


def _draw_secret(config: ExperimentConfig, rng: np.random.Generator) -> tuple[int, ...]:
    if config.s is not None:
        return tuple(x % config.q for x in config.s)
    if config.problem == "sis":
        k = config.effective_k
        return tuple(int(x) % config.q for x in rng.integers(-k, k + 1, size=config.n))
    return tuple(int(x) for x in rng.integers(0, config.q, size=config.n))


def _sis_wrong_before_correct(secret: tuple[int, ...], k: int, q: int) -> list[int]:
    counts = []
    for coord in secret:
        target = (-coord) % q
        tried = 0
        for j in range(-k, k + 1):
            if j % q == target:
                break
            tried += 1
        counts.append(tried)
    return counts


def _build_runner(config: ExperimentConfig) -> tuple[
    Callable[[np.random.Generator], bool], float | None, float | None, float | None
]:
    """Per-trial success closure plus (exact, bound_paper, bound_optimized)."""
    fp = FieldParams(config.q)
    q, n, v = config.q, config.n, config.effective_v
    secret = _draw_secret(config, _trial_rng(config.seed, 2**63))
    k = config.effective_k
    registers = 2 * config.n if config.problem == "ring-global" else config.n + 1
    if (config.engine == "dense" or config.problem in ("sis", "ring-global")) and q**registers > MAX_AMPLITUDES:
        raise ParameterError(
            f"dense engine infeasible: q^{registers} = {q**registers} exceeds the 2**22 cap"
        )

    if config.problem in ("lwe", "lpn"):
        errors_as = "histogram" if config.engine == "analytic" else "auto"
        exact = _expected_iteration_success(q, n, v, config.noise)
        if config.problem == "lpn":
            if q != 2:
                raise ParameterError("lpn requires q = 2")
            bound_paper = 0.5 * (1.0 - 2.0 * config.noise.eta) ** 2
            bound_opt = None

            def run(rng: np.random.Generator) -> bool:
                src = sample_stream(fp, n, secret, v, config.noise, rng, errors_as=errors_as)
                return lpn_learn(src, config.L, rng, engine=config.engine).secret == secret

        else:
            if k >= 1:
                bound_paper = theoretical_bound(v, k, q, n, "paper")
                bound_opt = theoretical_bound(v, k, q, n, "optimized")
            else:
                bound_paper = bound_opt = exact
            learner_cfg = LearnerConfig(L=config.L, M=config.M, k=k, engine=config.engine)

            def run(rng: np.random.Generator) -> bool:
                src = sample_stream(fp, n, secret, v, config.noise, rng, errors_as=errors_as)
                return lwe_learn(learner_cfg, src, rng).secret == secret

        return run, exact, bound_paper, bound_opt

    if config.problem == "lwr":
        if config.p is None:
            raise ParameterError("lwr needs the rounding modulus p")
        spec = lwr_sample_spec(fp, n, secret, config.p)
        exact = outcome_distribution(spec).p_correct  # deterministic spec: exact success
        bound_paper = config.p / (12.0 * (q - 1))
        grid = np.arange(1e-4, 0.25, 1e-4)
        gamma_star = float(np.max(grid * np.cos(2.0 * np.pi * grid) ** 2))
        bound_opt = gamma_star * v / ((q / (2.0 * config.p)) * q**n)
        learner_cfg = LearnerConfig(L=config.L, M=config.M, engine=config.engine)

        def run(rng: np.random.Generator) -> bool:
            return lwr_learn(config.p, learner_cfg, lambda: spec, rng).secret == secret

        return run, exact, bound_paper, bound_opt

    if config.problem == "sis":
        source = sis_sample_stream(fp, n, secret)
        wrong = _sis_wrong_before_correct(secret, k, q)
        exact = math.prod((1.0 - q**-config.L) ** w for w in wrong)
        bound_paper = 1.0 - (2 * k + 1) * n / float(q) ** config.L

        def run(rng: np.random.Generator) -> bool:
            return sis_learn(k, config.L, source, rng) == secret

        return run, exact, bound_paper, None

    # ring-global
    if config.m is None:
        raise ParameterError("ring-global needs the conductor m")
    emb = RingEmbedding.build(fp, config.m)
    if config.n != emb.n:
        raise ParameterError(f"ring dimension is phi({config.m}) = {emb.n}, got n = {config.n}")
    ring_secret = tuple(x % q for x in secret)
    noise_mode = "none" if config.noise.kind == "none" else "uniform-global"
    exact = ((q - 1) / q) ** emb.n

    def run(rng: np.random.Generator) -> bool:
        src = ring_sample_stream(emb, ring_secret, rng, noise=noise_mode)
        return ring_lwe_global_learn(emb, src, rng).secret == ring_secret

    return run, exact, None, None


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the configured trials; deterministic for a fixed config and seed."""
    start = time.perf_counter()
    run, exact, bound_paper, bound_opt = _build_runner(config)

    def one(index: int) -> bool:
        return bool(run(_trial_rng(config.seed, index)))

    if config.workers == 1:
        outcomes = [one(i) for i in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(one, range(config.trials)))
    successes = sum(outcomes)
    lo, hi = wilson_interval(successes, config.trials)
    return ExperimentReport(
        config=config,
        successes=successes,
        trials=config.trials,
        empirical_rate=successes / config.trials,
        wilson_lo=lo,
        wilson_hi=hi,
        exact_probability=exact,
        bound_paper=bound_paper,
        bound_optimized=bound_opt,
        wall_time_ms=(time.perf_counter() - start) * 1e3,
    )


def sweep(configs: list[ExperimentConfig], csv_path: str | None = None) -> list[ExperimentReport]:
    """One report per config, in input order; per-row failures recorded, run continues."""
    if not configs:
        raise ParameterError("sweep needs at least one configuration")
    reports = []
    for config in configs:
        try:
            reports.append(run_experiment(config))
        except Exception as exc:  # noqa: BLE001 - failures become report rows
            reports.append(
                ExperimentReport(
                    config=config, successes=0, trials=0, empirical_rate=float("nan"),
                    wilson_lo=float("nan"), wilson_hi=float("nan"), exact_probability=None,
                    bound_paper=None, bound_optimized=None, wall_time_ms=0.0,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
    if csv_path is not None:
        write_csv(reports, csv_path)
    return reports


def write_csv(reports: list[ExperimentReport], path: str) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            if report.error is None:
                writer.writerow(report.csv_row())
            else:
                row = report.csv_row()
                writer.writerow(row[:12] + [""] * 7)
