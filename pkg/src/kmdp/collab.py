"""Multi-client collaborative estimation over honest-but-curious clients.

Seven pipelines build one global private Kaplan-Meier estimator from K
client shards. Each client applies its mechanism locally, sized by its own
public shard size; only released artifacts (surrogate datasets, curves or
probability vectors) ever reach the in-process aggregator.

========  ================  ==========================
path      local mechanism   shared / aggregated as
========  ================  ==========================
A         survival curve    surrogate datasets, pooled
B         survival curve    curves, weighted average
C         survival curve    probability vectors, weighted average
D         probability       surrogate datasets, pooled
E         probability       curves, weighted average
F         probability       probability vectors, weighted average
M         count matrix      reconstructed datasets, pooled
========  ================  ==========================
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mechanisms import DPCountMatrix, DPProbability, DPSurvival, isotonic_project
from .metrics import MetricReport, bootstrap_mean_ci, evaluate_fidelity
from .rng import NoiseSource, derive_seed
from .surrogate import generate_dataset
from .survival import (
    KMCurve,
    ProbMass,
    SurvivalData,
    build_grid,
    count_events,
    counts_to_dataset,
    discretize,
    km_estimate,
    km_to_prob,
    prob_to_km,
)
from .validation import check_fraction, check_positive, check_positive_int, round_half_away

PATH_IDS = ("A", "B", "C", "D", "E", "F", "M")
_SURV_PATHS = frozenset("ABC")
_PROB_PATHS = frozenset("DEF")
_POOLED = frozenset("ADM")
_AVG_CURVE = frozenset("BE")
_AVG_PROB = frozenset("CF")

METRIC_KEYS = ("p", "median", "s25", "s50", "s75")
_FRACTIONS = (0.25, 0.5, 0.75)

# Stream tags for seed derivation; larger than any plausible run index so the
# partition and bootstrap streams never collide with per-run streams.
_PARTITION_STREAM = 2**40 + 1
_BOOTSTRAP_STREAM = 2**40 + 2


@dataclass
class Partition:
    """Disjoint client shards whose union is the input dataset."""

    shards: list

    @property
    def sizes(self) -> list:
        return [s.n for s in self.shards]

    @property
    def n_total(self) -> int:
        return sum(self.sizes)


def split_even(data: SurvivalData, n_clients: int, rng: NoiseSource) -> Partition:
    """Shuffle and split into ``n_clients`` near-equal shards.

    The first N mod K shards get one extra record.
    """
    k = check_positive_int(n_clients, "n_clients")
    if k > data.n:
        raise ValueError(f"cannot split {data.n} records into {k} shards")
    order = rng.permutation(data.n)
    base, extra = divmod(data.n, k)
    sizes = [base + 1] * extra + [base] * (k - extra)
    return _slice(data, order, sizes)


def split_uneven(
    data: SurvivalData, n_clients: int, minority_fraction: float, rng: NoiseSource
) -> Partition:
    """One shard gets round(fraction * N) records; the rest split evenly."""
    k = check_positive_int(n_clients, "n_clients")
    if k < 2:
        raise ValueError("uneven split needs at least 2 clients")
    check_fraction(minority_fraction, "minority_fraction", closed_right=False)
    minority = int(round_half_away(minority_fraction * data.n))
    if minority < 1:
        raise ValueError("minority shard would be empty")
    rest = data.n - minority
    if rest < k - 1:
        raise ValueError("not enough records left for the remaining clients")
    order = rng.permutation(data.n)
    base, extra = divmod(rest, k - 1)
    sizes = [minority] + [base + 1] * extra + [base] * (k - 1 - extra)
    return _slice(data, order, sizes)


def _slice(data: SurvivalData, order: np.ndarray, sizes: list) -> Partition:
    shards = []
    start = 0
    for size in sizes:
        idx = order[start : start + size]
        shards.append(SurvivalData(times=data.times[idx], event_observed=data.event_observed[idx]))
        start += size
    return Partition(shards=shards)


def pool_datasets(datasets) -> SurvivalData:
    """Multiset union of survival datasets."""
    datasets = list(datasets)
    if not datasets:
        return SurvivalData(times=np.zeros(0), event_observed=np.zeros(0, dtype=np.int64))
    times = np.concatenate([d.times for d in datasets])
    events = np.concatenate([d.event_observed for d in datasets])
    return SurvivalData(times=times, event_observed=events)


def _check_aligned(artifacts, weights):
    if len(artifacts) == 0:
        raise ValueError("nothing to average")
    if len(artifacts) != len(weights):
        raise ValueError("one weight per artifact required")
    grid = artifacts[0].grid
    for a in artifacts[1:]:
        if not grid.matches(a.grid):
            raise ValueError("all clients must share the same grid")
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return grid, w


def average_km(curves, weights) -> KMCurve:
    """Size-weighted average of client survival curves.

    The average of valid curves is already nonincreasing in [0, 1]; the
    projection only repairs floating-point slack.
    """
    grid, w = _check_aligned(list(curves), list(weights))
    stacked = np.stack([c.values for c in curves])
    avg = (w[:, None] * stacked).sum(axis=0) / w.sum()
    return KMCurve(grid=grid, values=isotonic_project(avg))


def average_prob(probs, weights) -> ProbMass:
    """Size-weighted average of client probability vectors; keeps unit mass."""
    grid, w = _check_aligned(list(probs), list(weights))
    stacked = np.stack([p.values for p in probs])
    avg = (w[:, None] * stacked).sum(axis=0) / w.sum()
    return ProbMass(grid=grid, values=avg)


@dataclass
class CollabConfig:
    """Shared hyperparameters for one collaborative experiment.

    Grid parameters and k_fraction are standardized across clients; each
    client's noise scale uses its own public shard size. ``surrogate_size``
    overrides the default population sizes (clients use their own shard
    size, the aggregator uses the total).
    """

    epsilon: float
    bin_size: float
    t_max: float
    n_clients: int = 10
    k_fraction: float = 0.1
    prob_sensitivity_factor: float = 2.0
    split: str = "even"
    minority_fraction: float | None = None
    surrogate_size: int | None = None
    resplit_per_run: bool = False

    def __post_init__(self):
        check_positive(self.epsilon, "epsilon")
        check_positive(self.bin_size, "bin_size")
        check_positive(self.t_max, "t_max")
        check_positive_int(self.n_clients, "n_clients")
        check_fraction(self.k_fraction, "k_fraction")
        if self.split not in ("even", "uneven"):
            raise ValueError(f"split must be 'even' or 'uneven', got {self.split!r}")
        if self.split == "uneven" and self.minority_fraction is None:
            raise ValueError("uneven split requires minority_fraction")

    def grid(self):
        return build_grid(self.t_max, self.bin_size)


def make_partition(data: SurvivalData, cfg: CollabConfig, rng: NoiseSource) -> Partition:
    if cfg.split == "uneven":
        return split_uneven(data, cfg.n_clients, cfg.minority_fraction, rng)
    return split_even(data, cfg.n_clients, rng)


def local_release(path_id: str, shard: SurvivalData, cfg: CollabConfig, rng: NoiseSource):
    """One client's private artifact for the given path.

    Returns a surrogate dataset (A/D/M), a private curve (B/E) or a private
    probability vector (C/F). Raw shard data never leaves this function.
    """
    grid = cfg.grid()
    counts = count_events(shard, grid)
    if path_id in _SURV_PATHS:
        mech = DPSurvival(epsilon=cfg.epsilon, k_fraction=cfg.k_fraction)
        private_curve = mech.release(km_estimate(counts), shard.n, rng)
        if path_id == "A":
            size = cfg.surrogate_size or shard.n
            return generate_dataset(km_to_prob(private_curve), size)
        if path_id == "B":
            return private_curve
        return km_to_prob(private_curve)
    if path_id in _PROB_PATHS:
        mech = DPProbability(epsilon=cfg.epsilon, sensitivity_factor=cfg.prob_sensitivity_factor)
        private_prob = mech.release(km_to_prob(km_estimate(counts)), shard.n, rng)
        if path_id == "D":
            size = cfg.surrogate_size or shard.n
            return generate_dataset(private_prob, size)
        if path_id == "E":
            return prob_to_km(private_prob)
        return private_prob
    if path_id == "M":
        private_counts = DPCountMatrix(epsilon=cfg.epsilon).release(counts, rng)
        return counts_to_dataset(private_counts)
    raise ValueError(f"unknown path {path_id!r}; expected one of {PATH_IDS}")


def aggregate_releases(path_id: str, releases, sizes, cfg: CollabConfig):
    """Central aggregation of client releases into (global curve, global surrogate).

    Consumes only private artifacts, so everything downstream is
    post-processing of the local releases.
    """
    total = int(sum(sizes))
    if path_id in _POOLED:
        pooled = pool_datasets(releases)
        curve = km_estimate(count_events(pooled, cfg.grid()))
        return curve, pooled
    if path_id in _AVG_CURVE:
        curve = average_km(releases, sizes)
        size = cfg.surrogate_size or total
        return curve, generate_dataset(km_to_prob(curve), size)
    if path_id in _AVG_PROB:
        avg = average_prob(releases, sizes)
        size = cfg.surrogate_size or total
        return prob_to_km(avg), generate_dataset(avg, size)
    raise ValueError(f"unknown path {path_id!r}; expected one of {PATH_IDS}")


@dataclass
class RunResult:
    curve: KMCurve
    surrogate: SurvivalData
    report: MetricReport


def run_path(
    path_id: str,
    partition: Partition,
    cfg: CollabConfig,
    rng: NoiseSource,
    reference: SurvivalData,
) -> RunResult:
    """Execute one collaboration run: local releases, aggregation, metrics.

    Client k draws from the stream spawned at index k, so results do not
    depend on the order clients are processed in.
    """
    releases = [
        local_release(path_id, shard, cfg, rng.spawn(k))
        for k, shard in enumerate(partition.shards)
    ]
    curve, surrogate = aggregate_releases(path_id, releases, partition.sizes, cfg)
    report = evaluate_fidelity(surrogate, reference, cfg.grid(), fractions=_FRACTIONS)
    return RunResult(curve=curve, surrogate=surrogate, report=report)


def metric_row(report: MetricReport) -> dict:
    """Flatten a report into the five tabulated metrics (missing median -> nan)."""
    return {
        "p": report.p_value,
        "median": np.nan if report.median is None else report.median,
        "s25": report.survival[0.25],
        "s50": report.survival[0.5],
        "s75": report.survival[0.75],
    }


def run_seed(master_seed: int, run_index: int) -> int:
    """Seed of Monte-Carlo run ``run_index``."""
    return derive_seed(master_seed, run_index)


@dataclass
class MonteCarloResult:
    metrics: dict
    summaries: dict
    master_seed: int
    n_runs: int
    partition_sizes: list = field(default_factory=list)


def monte_carlo(
    data: SurvivalData,
    path_id: str,
    cfg: CollabConfig,
    n_runs: int,
    master_seed: int,
    reference: SurvivalData | None = None,
    n_resamples: int = 10000,
    alpha: float = 0.05,
) -> MonteCarloResult:
    """Independent runs of one path with bootstrap CIs of the metric means.

    Run i draws from seed splitmix64(master_seed XOR i); the partition (one
    per experiment unless ``cfg.resplit_per_run``) and the bootstrap use
    dedicated streams. Outputs depend only on (data, config, master_seed).
    """
    check_positive_int(n_runs, "n_runs")
    grid = cfg.grid()
    disc = discretize(data, grid)
    if reference is None:
        reference = disc
    partition = None
    if not cfg.resplit_per_run:
        partition = make_partition(disc, cfg, NoiseSource(derive_seed(master_seed, _PARTITION_STREAM)))
    rows = []
    for i in range(n_runs):
        seed_i = run_seed(master_seed, i)
        part_i = partition
        if part_i is None:
            part_i = make_partition(disc, cfg, NoiseSource(derive_seed(seed_i, _PARTITION_STREAM)))
        result = run_path(path_id, part_i, cfg, NoiseSource(seed_i), reference)
        rows.append(metric_row(result.report))
    metrics = {key: np.array([row[key] for row in rows]) for key in METRIC_KEYS}
    boot_rng = NoiseSource(derive_seed(master_seed, _BOOTSTRAP_STREAM))
    summaries = {
        key: bootstrap_mean_ci(metrics[key], n_resamples, alpha, boot_rng) for key in METRIC_KEYS
    }
    return MonteCarloResult(
        metrics=metrics,
        summaries=summaries,
        master_seed=master_seed,
        n_runs=n_runs,
        partition_sizes=partition.sizes if partition is not None else [],
    )
