"""Surrogate dataset reconstruction from an event-probability vector.

The reconstruction assumes no censoring inside the study window: each bin's
probability mass becomes that many event records at the bin's grid point,
and the beyond-study element becomes records censored at the last grid
point. It is deterministic, and exact whenever ``size`` times each
probability is integral (in particular when the vector came from a dataset
of that size with no interior censoring).
"""

from __future__ import annotations

import numpy as np

from .survival import ProbMass, SurvivalData
from .validation import check_positive_int, round_half_away


def generate_dataset(prob: ProbMass, size: int) -> SurvivalData:
    """Populate a survival dataset of roughly ``size`` records from ``prob``.

    Per-bin record counts are round(y_j * size) with ties away from zero, so
    the output size can drift from ``size`` by at most half a record per bin;
    no rebalancing is applied.
    """
    size = check_positive_int(size, "size")
    counts = round_half_away(prob.values * size).astype(np.int64)
    points = prob.grid.points
    event_times = np.repeat(points, counts[:-1])
    censored = np.full(counts[-1], prob.grid.last_point)
    times = np.concatenate([event_times, censored])
    flags = np.concatenate(
        [np.ones(event_times.size, dtype=np.int64), np.zeros(censored.size, dtype=np.int64)]
    )
    return SurvivalData(times=times, event_observed=flags)
