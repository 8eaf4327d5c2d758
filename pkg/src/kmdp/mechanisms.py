"""Laplace-based release mechanisms for survival statistics.

Three mechanisms, all under bounded epsilon-DP (dataset size is public):

* ``DPSurvival``: noises the first k coefficients of the orthonormal cosine
  transform of the survival curve, zeros the rest, inverts, and projects the
  result back onto nonincreasing [0, 1] curves.
* ``DPProbability``: noises the event-probability vector elementwise, clips
  at zero and renormalizes to unit mass.
* ``DPCountMatrix``: noises per-bin event/censoring counts (sensitivity 2),
  keeping the initial at-risk size fixed, then rounds, clamps and truncates
  so the derived at-risk sequence never goes negative.

A ``release`` call is a one-shot privacy spend: calling it twice on the same
data doubles the budget actually consumed.
"""

from __future__ import annotations

import enum
import math
import warnings

import numpy as np
from sklearn.base import BaseEstimator

from . import dct
from .rng import NoiseSource
from .survival import CountMatrix, KMCurve, ProbMass
from .validation import (
    check_fraction,
    check_positive,
    check_positive_int,
    check_vector,
    round_half_away,
)


class SensitivityMode(enum.Enum):
    """Which sensitivity bound to use.

    ``NO_CENSORING`` is the standard setting: the bounds hold when the data
    contain no censored records. ``WORST_CASE_CENSORING`` substitutes C = N
    into the censoring-dependent bounds; the resulting noise is so large it
    destroys utility, and because the bound depends on a data property it is
    not a standard privacy guarantee. It exists only to reproduce worst-case
    figures and must be explicitly acknowledged by the caller.
    """

    NO_CENSORING = "no-censoring"
    WORST_CASE_CENSORING = "worst-case-censoring"


def km_sensitivity(n: int, t: int, mode: SensitivityMode = SensitivityMode.NO_CENSORING):
    """(L1, L2) sensitivity of the grid-sampled survival curve.

    Without censoring: ((T-1)/N, sqrt(T-1)/N). Worst case substitutes C = N
    into the censored bounds T*C/N and sqrt(T)*C/N.
    """
    n = check_positive_int(n, "n")
    t = check_positive_int(t, "t")
    if mode is SensitivityMode.NO_CENSORING:
        return (t - 1) / n, math.sqrt(t - 1) / n
    return float(t), math.sqrt(t)


def prob_sensitivity(n: int, t: int, mode: SensitivityMode = SensitivityMode.NO_CENSORING):
    """(L1, L2) sensitivity of the event-probability vector.

    Without censoring: (2/N, sqrt(2)/N). Worst case as in
    :func:`km_sensitivity`.
    """
    n = check_positive_int(n, "n")
    t = check_positive_int(t, "t")
    if mode is SensitivityMode.NO_CENSORING:
        return 2.0 / n, math.sqrt(2.0) / n
    return float(t), math.sqrt(t)


def coefficient_count(k_fraction: float, n_points: int) -> int:
    """Number of retained transform coefficients: max(1, round(k_fraction * T))."""
    check_fraction(k_fraction, "k_fraction")
    k = int(round_half_away(k_fraction * n_points))
    return min(max(1, k), n_points)


def project_nonincreasing(v) -> np.ndarray:
    """L2 projection onto nonincreasing vectors (pool-adjacent-violators)."""
    v = check_vector(v, "v")
    # PAVA for nondecreasing fits; negate to get the nonincreasing cone.
    level_mean: list[float] = []
    level_width: list[int] = []
    for x in -v:
        mean, width = float(x), 1
        while level_mean and level_mean[-1] > mean:
            prev_mean, prev_width = level_mean.pop(), level_width.pop()
            total = prev_width + width
            mean = (prev_mean * prev_width + mean * width) / total
            width = total
        level_mean.append(mean)
        level_width.append(width)
    return -np.repeat(level_mean, level_width)


def isotonic_project(v) -> np.ndarray:
    """Nonincreasing projection followed by an elementwise clamp to [0, 1]."""
    return np.clip(project_nonincreasing(v), 0.0, 1.0)


def _check_worst_case(mode, acknowledged):
    if mode is SensitivityMode.WORST_CASE_CENSORING and not acknowledged:
        raise ValueError(
            "worst-case censoring sensitivity is not a standard privacy "
            "guarantee; pass acknowledge_worst_case=True to use it anyway"
        )


class DPSurvival(BaseEstimator):
    """Release a survival curve under epsilon-DP via truncated cosine coefficients.

    Parameters
    ----------
    epsilon : float
        Privacy budget.
    k_fraction : float, default=0.1
        Fraction of transform coefficients kept (public hyperparameter).
    sensitivity_mode : SensitivityMode, default=NO_CENSORING
        The no-censoring bounds assume the underlying data are uncensored;
        that is the caller's responsibility.
    """

    def __init__(
        self,
        epsilon: float,
        k_fraction: float = 0.1,
        sensitivity_mode: SensitivityMode = SensitivityMode.NO_CENSORING,
        acknowledge_worst_case: bool = False,
    ):
        self.epsilon = epsilon
        self.k_fraction = k_fraction
        self.sensitivity_mode = sensitivity_mode
        self.acknowledge_worst_case = acknowledge_worst_case

    def release(self, curve: KMCurve, n_public: int, rng: NoiseSource) -> KMCurve:
        """One private release of ``curve`` for a dataset of public size ``n_public``.

        Draws exactly k Laplace samples (scale sqrt(k) * Delta2 / epsilon) for
        the retained coefficients; truncated coefficients never leave the
        mechanism, so they are not noised.
        """
        check_positive(self.epsilon, "epsilon")
        _check_worst_case(self.sensitivity_mode, self.acknowledge_worst_case)
        t = curve.grid.n_points
        k = coefficient_count(self.k_fraction, t)
        _, delta2 = km_sensitivity(n_public, t, self.sensitivity_mode)
        scale = math.sqrt(k) * delta2 / self.epsilon
        coeffs = dct.dct(curve.values)
        coeffs[:k] += rng.laplace(scale, k)
        coeffs[k:] = 0.0
        noisy = dct.idct(coeffs)
        return KMCurve(grid=curve.grid, values=isotonic_project(noisy))


class DPProbability(BaseEstimator):
    """Release an event-probability vector under epsilon-DP.

    Parameters
    ----------
    epsilon : float
        Privacy budget.
    sensitivity_factor : float, default=2.0
        Delta1 = sensitivity_factor / N. The default 2 is the proven L1
        bound; sqrt(2) reproduces the tighter-but-unproven convention some
        implementations use.
    """

    def __init__(
        self,
        epsilon: float,
        sensitivity_factor: float = 2.0,
        sensitivity_mode: SensitivityMode = SensitivityMode.NO_CENSORING,
        acknowledge_worst_case: bool = False,
    ):
        self.epsilon = epsilon
        self.sensitivity_factor = sensitivity_factor
        self.sensitivity_mode = sensitivity_mode
        self.acknowledge_worst_case = acknowledge_worst_case

    def release(self, prob: ProbMass, n_public: int, rng: NoiseSource) -> ProbMass:
        """Noise every element, clip at zero, renormalize to unit mass.

        If clipping zeroes the whole vector (only plausible at tiny N and
        epsilon), all mass is placed on the beyond-study element and a
        RuntimeWarning is emitted.
        """
        check_positive(self.epsilon, "epsilon")
        check_positive(self.sensitivity_factor, "sensitivity_factor")
        _check_worst_case(self.sensitivity_mode, self.acknowledge_worst_case)
        if self.sensitivity_mode is SensitivityMode.NO_CENSORING:
            delta1 = self.sensitivity_factor / check_positive_int(n_public, "n_public")
        else:
            delta1, _ = prob_sensitivity(n_public, prob.grid.n_points, self.sensitivity_mode)
        noisy = prob.values + rng.laplace(delta1 / self.epsilon, prob.values.size)
        clipped = np.maximum(noisy, 0.0)
        total = clipped.sum()
        if total <= 0.0:
            warnings.warn(
                "noisy probability vector clipped to all zeros; "
                "returning unit mass beyond the study end",
                RuntimeWarning,
            )
            fallback = np.zeros_like(clipped)
            fallback[-1] = 1.0
            return ProbMass(grid=prob.grid, values=fallback)
        return ProbMass(grid=prob.grid, values=clipped / total)


class DPCountMatrix(BaseEstimator):
    """Release per-bin counts under epsilon-DP with Laplace(2 / epsilon) noise.

    The initial at-risk size stays exact (bounded DP: dataset size is
    public). Post-processing rounds to integers, clamps at zero, and zeroes
    every count from the first bin whose counts would drive the at-risk
    sequence negative, freezing the sequence there.
    """

    def __init__(self, epsilon: float):
        self.epsilon = epsilon

    def release(self, counts: CountMatrix, rng: NoiseSource) -> CountMatrix:
        """One private release; consumes exactly 2 * T noise samples."""
        check_positive(self.epsilon, "epsilon")
        t = counts.grid.n_points
        noise = rng.laplace(2.0 / self.epsilon, 2 * t)
        d = np.maximum(round_half_away(counts.events + noise[:t]), 0.0)
        c = np.maximum(round_half_away(counts.censored + noise[t:]), 0.0)
        at_risk = counts.n_initial
        for j in range(t):
            if d[j] + c[j] > at_risk:
                d[j:] = 0.0
                c[j:] = 0.0
                break
            at_risk -= d[j] + c[j]
        return CountMatrix(grid=counts.grid, n_initial=counts.n_initial, events=d, censored=c)
