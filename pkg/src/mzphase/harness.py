"""Estimation runs, batches, phase sweeps and aggregate statistics.

Seeding contract: the run addressed by (base_seed, phase_index,
run_index) draws every random quantity from
``make_generator([base_seed, phase_index, run_index])`` (PCG64), so
batches are reproducible run by run and safe to evaluate in a worker
pool; aggregation always happens in run-index order.

Strategies:

* 'go' / 'pgh' (or an explicit Heuristic): online Bayesian estimation,
  posterior updated with the model channel (ideal by default, i.e. the
  updater is not told about the noise);
* a Policy: offline feedback sequence, estimate is the final feedback
  phase, no posterior is maintained;
* 'inversion' / 'bayes-fixed': non-adaptive baselines with the feedback
  phase held at 0.
"""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .circular import TWO_PI, wrap_phase, wrap_signed
from .heuristics import Heuristic, next_feedback
from .interferometer import (
    IDEAL,
    NoiseChannel,
    precision_bound,
    sample_outcome,
)
from .nonadaptive import CountSummary, inversion_estimate
from .posterior import DEFAULT_GRID_SIZE, PosteriorGrid
from .pso import Policy, apply_policy_step
from .rng import make_generator

__all__ = [
    "RunRecord",
    "BatchStats",
    "PhaseBatch",
    "run_estimation",
    "run_batch",
    "sweep_phases",
    "batch_stats_at_step",
    "sigma_vs_probes",
    "reference_curves",
    "write_batch_csv",
    "BATCH_CSV_COLUMNS",
]


@dataclass
class RunRecord:
    """One n-probe estimation trajectory.

    sigmas holds the per-step posterior deviation for Bayesian
    strategies and NaN where no single-run uncertainty exists (policy
    and inversion strategies).
    """

    phi_true: float
    strategy: str
    sample_channel: NoiseChannel
    model_channel: NoiseChannel
    seed: tuple
    feedbacks: np.ndarray
    outcomes: np.ndarray
    estimates: np.ndarray
    sigmas: np.ndarray

    @property
    def n(self):
        return self.outcomes.size

    @property
    def final_estimate(self):
        return float(self.estimates[-1])

    def to_dict(self):
        return {
            "phi_true": self.phi_true,
            "strategy": self.strategy,
            "sample_channel": self.sample_channel.to_dict(),
            "model_channel": self.model_channel.to_dict(),
            "seed": list(self.seed),
            "final_estimate": self.final_estimate,
            "steps": [
                {
                    "k": k + 1,
                    "feedback": float(self.feedbacks[k]),
                    "outcome": int(self.outcomes[k]),
                    "estimate": float(self.estimates[k]),
                    "sigma": None if math.isnan(self.sigmas[k]) else float(self.sigmas[k]),
                }
                for k in range(self.n)
            ],
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_dict(cls, d):
        steps = d["steps"]
        sigmas = [math.nan if s["sigma"] is None else s["sigma"] for s in steps]
        return cls(
            phi_true=d["phi_true"],
            strategy=d["strategy"],
            sample_channel=NoiseChannel.from_dict(d["sample_channel"]),
            model_channel=NoiseChannel.from_dict(d["model_channel"]),
            seed=tuple(d["seed"]),
            feedbacks=np.array([s["feedback"] for s in steps]),
            outcomes=np.array([s["outcome"] for s in steps], dtype=np.int64),
            estimates=np.array([s["estimate"] for s in steps]),
            sigmas=np.array(sigmas),
        )


@dataclass
class BatchStats:
    """Aggregate over M independent runs at one true phase.

    sigma_est is the square root of the Holevo variance of the wrapped
    final-estimate errors; the error bars follow sigma_est * M^(-1/2)
    for the mean and sigma_est * [2(M-1)]^(-1/2) for sigma_est itself.
    Quadratic loss averages the squared wrapped errors.
    """

    m: int
    circular_mean: float
    sigma_est: float
    err_mean: float
    err_sigma: float
    quad_loss: float

    @classmethod
    def from_estimates(cls, estimates, phi_true):
        estimates = np.asarray(estimates, dtype=float)
        m = estimates.size
        if m < 2:
            raise ValueError("need at least 2 runs for error bars")
        errors = wrap_signed(estimates - phi_true)
        resultant = np.exp(1j * errors).mean()
        s = abs(resultant)
        if s < 1e-15:
            sigma = math.inf
        else:
            sigma = math.sqrt(max(1.0 / (s * s) - 1.0, 0.0))
        mean_z = np.exp(1j * estimates).mean()
        circ_mean = wrap_phase(math.atan2(mean_z.imag, mean_z.real))
        return cls(
            m=m,
            circular_mean=circ_mean,
            sigma_est=sigma,
            err_mean=sigma / math.sqrt(m),
            err_sigma=sigma / math.sqrt(2.0 * (m - 1)),
            quad_loss=float(np.mean(errors ** 2)),
        )


@dataclass
class PhaseBatch:
    phi_true: float
    stats: BatchStats
    records: list


def _resolve_strategy(strategy):
    """Map the strategy argument to (label, resolved object)."""
    if isinstance(strategy, Policy):
        return "policy", strategy
    if isinstance(strategy, Heuristic):
        return strategy.kind, strategy
    if strategy == "go":
        return "go", Heuristic(kind="go")
    if strategy == "pgh":
        return "pgh", Heuristic(kind="pgh")
    if strategy in ("inversion", "bayes-fixed"):
        return strategy, strategy
    raise ValueError(f"unknown strategy: {strategy!r}")


def run_estimation(
    phi_true,
    n,
    strategy,
    sample_channel=IDEAL,
    model_channel=None,
    grid_size=DEFAULT_GRID_SIZE,
    seed=0,
    snapshot=None,
):
    """Simulate one n-probe estimation run.

    model_channel defaults to the ideal channel regardless of
    sample_channel (noise-unaware operation). snapshot, if given, is
    called as snapshot(k, grid) after each posterior update of a
    Bayesian strategy.
    """
    if n < 1:
        raise ValueError(f"probe count must be >= 1, got {n}")
    label, resolved = _resolve_strategy(strategy)
    if label == "policy" and resolved.n < n:
        raise ValueError(f"policy length {resolved.n} is shorter than n={n}")
    if model_channel is None:
        model_channel = IDEAL
    phi_true = wrap_phase(float(phi_true))
    entropy = [seed] if np.isscalar(seed) else list(seed)
    rng = make_generator(entropy)

    feedbacks = np.empty(n)
    outcomes = np.empty(n, dtype=np.int64)
    estimates = np.empty(n)
    sigmas = np.full(n, math.nan)

    if label in ("go", "pgh"):
        grid = PosteriorGrid.uniform(grid_size)
        for k in range(1, n + 1):
            fb = next_feedback(resolved, grid, k, rng)
            x = sample_outcome(sample_channel, phi_true, fb, rng)
            grid.update(x, fb, model_channel)
            if snapshot is not None:
                snapshot(k, grid)
            summary = grid.gaussian_summary()
            feedbacks[k - 1] = fb
            outcomes[k - 1] = x
            estimates[k - 1] = summary.mu
            sigmas[k - 1] = summary.sigma
    elif label == "policy":
        fb, prev = 0.0, 0
        for k in range(1, n + 1):
            fb = apply_policy_step(resolved, fb, prev, k)
            prev = sample_outcome(sample_channel, phi_true, fb, rng)
            feedbacks[k - 1] = fb
            outcomes[k - 1] = prev
            estimates[k - 1] = fb
    elif label == "inversion":
        n0 = 0
        for k in range(1, n + 1):
            x = sample_outcome(sample_channel, phi_true, 0.0, rng)
            n0 += x == 0
            feedbacks[k - 1] = 0.0
            outcomes[k - 1] = x
            estimates[k - 1] = inversion_estimate(CountSummary(n0, k - n0))
    else:  # bayes-fixed
        grid = PosteriorGrid.uniform(grid_size, support=(0.0, math.pi))
        for k in range(1, n + 1):
            x = sample_outcome(sample_channel, phi_true, 0.0, rng)
            grid.update(x, 0.0, model_channel)
            if snapshot is not None:
                snapshot(k, grid)
            summary = grid.gaussian_summary()
            feedbacks[k - 1] = 0.0
            outcomes[k - 1] = x
            estimates[k - 1] = summary.mu
            sigmas[k - 1] = summary.sigma

    return RunRecord(
        phi_true=phi_true,
        strategy=label,
        sample_channel=sample_channel,
        model_channel=model_channel,
        seed=tuple(entropy),
        feedbacks=feedbacks,
        outcomes=outcomes,
        estimates=estimates,
        sigmas=sigmas,
    )


def _run_indexed(args):
    index, kwargs = args
    return index, run_estimation(**kwargs)


def run_batch(
    phi_true,
    n,
    strategy,
    m,
    sample_channel=IDEAL,
    model_channel=None,
    grid_size=DEFAULT_GRID_SIZE,
    base_seed=0,
    phase_index=0,
    workers=1,
):
    """M independent runs at one true phase; returns (BatchStats, records).

    Run i is seeded by [base_seed, phase_index, i]. With workers > 1 the
    runs are evaluated in a process pool; results are re-assembled in
    run order so the aggregate does not depend on scheduling.
    """
    if m < 2:
        raise ValueError("need m >= 2 runs")
    jobs = [
        (
            i,
            dict(
                phi_true=phi_true,
                n=n,
                strategy=strategy,
                sample_channel=sample_channel,
                model_channel=model_channel,
                grid_size=grid_size,
                seed=[base_seed, phase_index, i],
            ),
        )
        for i in range(m)
    ]
    records = [None] * m
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for index, record in pool.map(_run_indexed, jobs, chunksize=8):
                records[index] = record
    else:
        for job in jobs:
            index, record = _run_indexed(job)
            records[index] = record
    stats = BatchStats.from_estimates([r.final_estimate for r in records], phi_true)
    return stats, records


def sweep_phases(
    strategy,
    n,
    phases,
    m,
    sample_channel=IDEAL,
    model_channel=None,
    grid_size=DEFAULT_GRID_SIZE,
    base_seed=0,
    workers=1,
    keep_records=True,
):
    """run_batch per phase; an int phase argument means an even grid of
    that many phases, offset by half a cell to avoid phi = 0 exactly."""
    if np.isscalar(phases):
        count = int(phases)
        if count < 1:
            raise ValueError("phase count must be >= 1")
        phases = [(j + 0.5) * TWO_PI / count for j in range(count)]
    else:
        phases = [float(p) for p in phases]
        if not phases:
            raise ValueError("empty phase list")
    results = []
    for j, phi in enumerate(phases):
        stats, records = run_batch(
            phi,
            n,
            strategy,
            m,
            sample_channel=sample_channel,
            model_channel=model_channel,
            grid_size=grid_size,
            base_seed=base_seed,
            phase_index=j,
            workers=workers,
        )
        results.append(PhaseBatch(phi, stats, records if keep_records else []))
    return results


def batch_stats_at_step(records, k):
    """BatchStats from the per-step estimates at probe k of a batch."""
    if not records:
        raise ValueError("no records")
    estimates = [float(r.estimates[k - 1]) for r in records]
    return BatchStats.from_estimates(estimates, records[0].phi_true)


def sigma_vs_probes(sweep_results, ks):
    """Phase-averaged sigma_est and quadratic loss at selected probe counts.

    Requires the sweep to have kept its RunRecords. Returns one dict per
    k with the mean over phases and the combined standard error of that
    mean (quadrature sum of per-phase error bars).
    """
    rows = []
    for k in ks:
        sigmas = []
        losses = []
        errs = []
        for batch in sweep_results:
            stats = batch_stats_at_step(batch.records, k)
            sigmas.append(stats.sigma_est)
            losses.append(stats.quad_loss)
            errs.append(stats.err_sigma)
        rows.append(
            {
                "n": k,
                "sigma_est": float(np.mean(sigmas)),
                "sigma_err": float(np.sqrt(np.sum(np.square(errs))) / len(errs)),
                "quad_loss": float(np.mean(losses)),
            }
        )
    return rows


def reference_curves(channel, n_values):
    """Standard quantum limit and Cramer-Rao bound per probe count."""
    n_values = list(n_values)
    if not n_values:
        raise ValueError("empty probe-count range")
    return [
        {"n": n, "sql": 1.0 / math.sqrt(n), "crb": precision_bound(channel, n)}
        for n in n_values
    ]


BATCH_CSV_COLUMNS = [
    "strategy",
    "channel",
    "phi_true",
    "n",
    "m",
    "circ_mean",
    "sigma_est",
    "err_mean",
    "err_sigma",
    "quad_loss",
    "sql",
    "crb",
]


def write_batch_csv(path, rows):
    """Write benchmark rows (dicts keyed by BATCH_CSV_COLUMNS) as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BATCH_CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _csv_cell(row.get(key)) for key in BATCH_CSV_COLUMNS})


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value
