"""Input validation helpers shared by estimators, mechanisms and I/O."""

from __future__ import annotations

import numpy as np


def check_positive(value, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def check_positive_int(value, name: str) -> int:
    ivalue = int(value)
    if ivalue != value or ivalue < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return ivalue


def check_fraction(value, name: str, *, closed_right: bool = True) -> float:
    value = float(value)
    hi_ok = value <= 1.0 if closed_right else value < 1.0
    if not (0.0 < value and hi_ok):
        bound = "(0, 1]" if closed_right else "(0, 1)"
        raise ValueError(f"{name} must be in {bound}, got {value}")
    return value


def check_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"{name} must be a nonempty 1-d vector")
    return v


def check_duration_event_arrays(durations, event_observed=None, *, allow_empty=True):
    """Coerce and validate (durations, event flags) into float/int arrays.

    Event flags default to all-observed. Durations must be finite and
    nonnegative; flags must be exactly 0 or 1.
    """
    t = np.asarray(durations, dtype=float).ravel()
    if t.size == 0 and not allow_empty:
        raise ValueError("durations must be nonempty")
    if not np.all(np.isfinite(t)):
        raise ValueError("durations contain non-finite values")
    if np.any(t < 0):
        raise ValueError("durations must be nonnegative")
    if event_observed is None:
        e = np.ones(t.size, dtype=np.int64)
    else:
        e_raw = np.asarray(event_observed, dtype=float).ravel()
        if e_raw.size != t.size:
            raise ValueError(
                f"event_observed length {e_raw.size} does not match durations length {t.size}"
            )
        if not np.all(np.isin(e_raw, (0.0, 1.0))):
            raise ValueError("event_observed entries must be 0 or 1")
        e = e_raw.astype(np.int64)
    return t, e


def round_half_away(x):
    """Round to nearest integer with ties away from zero (numpy rounds ties to even)."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return out if out.ndim else float(out)
