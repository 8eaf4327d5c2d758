"""Survival-data representations and lossless conversions.

The four representations and how they connect:

* ``SurvivalData``: raw or grid-aligned (time, event flag) records.
* ``CountMatrix``: per-bin event/censoring counts plus the initial at-risk
  size; the at-risk sequence is recovered by a running subtraction.
* ``KMCurve``: Kaplan-Meier survival probabilities sampled on the grid.
* ``ProbMass``: per-bin event probabilities with one extra element for mass
  beyond the study end, summing to one.

Conversions between curve and probability vector are exact inverses of each
other; dataset <-> counts are exact on integer counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .validation import check_duration_event_arrays, check_positive

_REL_TOL = 1e-9


@dataclass(frozen=True)
class TimeGrid:
    """Equidistant time grid: points 0, b, 2b, ..., (n_points-1)*b."""

    bin_size: float
    t_max: float
    n_points: int

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_points) * self.bin_size

    @property
    def last_point(self) -> float:
        return (self.n_points - 1) * self.bin_size

    def index_of(self, times) -> np.ndarray:
        """Bin indices for times that already sit on grid points."""
        t = np.asarray(times, dtype=float)
        idx = np.asarray(np.rint(t / self.bin_size), dtype=np.int64)
        if np.any(idx < 0) or np.any(idx >= self.n_points):
            raise ValueError("time outside grid")
        if np.any(np.abs(idx * self.bin_size - t) > _REL_TOL * max(1.0, self.last_point)):
            raise ValueError("times are not aligned to the grid; discretize first")
        return idx

    def matches(self, other: "TimeGrid") -> bool:
        return (
            self.n_points == other.n_points
            and math.isclose(self.bin_size, other.bin_size, rel_tol=_REL_TOL)
            and math.isclose(self.t_max, other.t_max, rel_tol=_REL_TOL)
        )


def build_grid(t_max: float, bin_size: float) -> TimeGrid:
    """Build the equidistant grid covering [0, t_max].

    The number of points is ceil(t_max / bin_size) + 1, so the last grid
    point is the smallest multiple of ``bin_size`` at or above ``t_max``.
    """
    t_max = check_positive(t_max, "t_max")
    bin_size = check_positive(bin_size, "bin_size")
    n_bins = max(1, math.ceil(t_max / bin_size - _REL_TOL))
    return TimeGrid(bin_size=bin_size, t_max=t_max, n_points=n_bins + 1)


@dataclass
class SurvivalData:
    """(time, event flag) records; flag 1 = event of interest, 0 = censored."""

    times: np.ndarray
    event_observed: np.ndarray

    def __post_init__(self):
        self.times, self.event_observed = check_duration_event_arrays(
            self.times, self.event_observed
        )

    @property
    def n(self) -> int:
        return self.times.size

    @property
    def n_censored(self) -> int:
        return int(np.sum(self.event_observed == 0))


@dataclass
class CountMatrix:
    """Per-bin counts: events, censorings, plus the initial at-risk size."""

    grid: TimeGrid
    n_initial: float
    events: np.ndarray
    censored: np.ndarray

    def __post_init__(self):
        self.events = np.asarray(self.events, dtype=float)
        self.censored = np.asarray(self.censored, dtype=float)
        if self.events.shape != (self.grid.n_points,) or self.censored.shape != (
            self.grid.n_points,
        ):
            raise ValueError("count vectors must have one entry per grid point")

    def at_risk(self) -> np.ndarray:
        """At-risk sequence: r_0 = n_initial, r_j = r_{j-1} - d_{j-1} - c_{j-1}."""
        removed = np.concatenate(([0.0], (self.events + self.censored)[:-1]))
        return self.n_initial - np.cumsum(removed)


@dataclass
class KMCurve:
    """Survival probabilities sampled on a grid; nonincreasing, in [0, 1]."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError("curve must have one value per grid point")


@dataclass
class ProbMass:
    """Per-bin event probabilities plus one beyond-study element; sums to 1."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points + 1,):
            raise ValueError("probability vector must have grid length + 1 entries")


def discretize(data: SurvivalData, grid: TimeGrid) -> SurvivalData:
    """Snap raw times onto the grid with right-closed bins.

    A time t > 0 maps to the smallest grid point >= t; t = 0 is pushed to the
    first bin (nothing can be observed at time zero). Records beyond
    ``grid.t_max`` are clamped to the last grid point and marked censored
    (administrative censoring at study end).
    """
    idx = np.ceil(data.times / grid.bin_size - _REL_TOL).astype(np.int64)
    idx = np.maximum(idx, 1)
    events = data.event_observed.copy()
    overflow = data.times > grid.t_max
    idx[overflow] = grid.n_points - 1
    events[overflow] = 0
    return SurvivalData(times=idx * grid.bin_size, event_observed=events)


def count_events(data: SurvivalData, grid: TimeGrid) -> CountMatrix:
    """Tally events and censorings per bin for grid-aligned data."""
    t = grid.n_points
    if data.n == 0:
        return CountMatrix(grid, 0, np.zeros(t), np.zeros(t))
    idx = grid.index_of(data.times)
    d = np.bincount(idx[data.event_observed == 1], minlength=t).astype(float)
    c = np.bincount(idx[data.event_observed == 0], minlength=t).astype(float)
    return CountMatrix(grid=grid, n_initial=data.n, events=d, censored=c)


def km_estimate(counts: CountMatrix) -> KMCurve:
    """Kaplan-Meier curve from per-bin counts.

    S(t_j) is the running product of (r_i - d_i) / r_i over bins i <= j.
    Bins with an empty risk set contribute a factor of one, freezing the
    curve once everyone has left the study.
    """
    r = counts.at_risk()
    factors = np.where(r > 0, (r - counts.events) / np.where(r > 0, r, 1.0), 1.0)
    return KMCurve(grid=counts.grid, values=np.cumprod(factors))


def km_to_prob(curve: KMCurve) -> ProbMass:
    """Per-bin event probabilities from a survival curve.

    y_0 = 0, y_j = S(t_{j-1}) - S(t_j), and the final element absorbs the
    remaining mass so the vector sums to one.
    """
    s = curve.values
    y = np.empty(s.size + 1)
    y[0] = 0.0
    y[1:-1] = s[:-1] - s[1:]
    y[-1] = 1.0 - np.sum(y[:-1])
    return ProbMass(grid=curve.grid, values=y)


def prob_to_km(prob: ProbMass) -> KMCurve:
    """Survival curve from per-bin event probabilities: S(t_j) = 1 - sum_{i<=j} y_i."""
    return KMCurve(grid=prob.grid, values=1.0 - np.cumsum(prob.values[:-1]))


def counts_to_dataset(counts: CountMatrix) -> SurvivalData:
    """Expand integer per-bin counts back into individual records."""
    d = np.rint(counts.events).astype(np.int64)
    c = np.rint(counts.censored).astype(np.int64)
    if np.any(d < 0) or np.any(c < 0):
        raise ValueError("counts must be nonnegative to expand into records")
    if np.max(np.abs(d - counts.events), initial=0) > 1e-6 or np.max(
        np.abs(c - counts.censored), initial=0
    ) > 1e-6:
        raise ValueError("counts must be integral to expand into records")
    points = counts.grid.points
    times = np.concatenate([np.repeat(points, d), np.repeat(points, c)])
    flags = np.concatenate([np.ones(int(d.sum()), dtype=np.int64), np.zeros(int(c.sum()), dtype=np.int64)])
    if times.size == 0:
        return SurvivalData(times=np.zeros(0), event_observed=np.zeros(0, dtype=np.int64))
    return SurvivalData(times=times, event_observed=flags)


class KaplanMeierEstimator(BaseEstimator):
    """Kaplan-Meier estimator on an equidistant time grid.

    Parameters
    ----------
    bin_size : float, default=1.0
        Width of the discretization bins, in the units of the input times.
    t_max : float, optional
        Study horizon. Defaults to the maximum observed duration; records
        beyond it are clamped to the last grid point and censored.

    Attributes
    ----------
    grid_ : TimeGrid
    counts_ : CountMatrix
    curve_ : KMCurve

    Examples
    --------
    >>> km = KaplanMeierEstimator(bin_size=1.0).fit([1, 2, 3, 4, 5], [1, 1, 0, 1, 0])
    >>> km.curve_.values
    array([1. , 0.8, 0.6, 0.6, 0.3, 0.3])
    """

    def __init__(self, bin_size: float = 1.0, t_max: float | None = None):
        self.bin_size = bin_size
        self.t_max = t_max

    def fit(self, durations, event_observed=None):
        t, e = check_duration_event_arrays(durations, event_observed, allow_empty=False)
        t_max = self.t_max if self.t_max is not None else float(np.max(t))
        if t_max <= 0:
            raise ValueError("all durations are zero; cannot build a grid")
        self.grid_ = build_grid(t_max, self.bin_size)
        self.data_ = discretize(SurvivalData(t, e), self.grid_)
        self.counts_ = count_events(self.data_, self.grid_)
        self.curve_ = km_estimate(self.counts_)
        return self

    def predict(self, times) -> np.ndarray:
        """Step-function survival probability at arbitrary times."""
        if not hasattr(self, "curve_"):
            raise ValueError("estimator is not fitted yet; call fit first")
        t = np.atleast_1d(np.asarray(times, dtype=float))
        idx = np.floor(t / self.grid_.bin_size + _REL_TOL).astype(np.int64)
        idx = np.clip(idx, 0, self.grid_.n_points - 1)
        return self.curve_.values[idx]
