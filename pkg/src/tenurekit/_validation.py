"""Input validation helpers shared by the estimators and test functions."""

from __future__ import annotations

import numpy as np


def as_sample(x, name: str = "x", min_len: int = 1) -> np.ndarray:
    """Coerce to a 1-d float array of finite values."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size < min_len:
        raise ValueError(f"{name} needs at least {min_len} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_durations_events(durations, events=None) -> tuple[np.ndarray, np.ndarray]:
    """Validate a censored-duration sample.

    ``events`` defaults to all-observed; durations must be strictly positive.
    """
    dur = as_sample(durations, "durations")
    if np.any(dur <= 0):
        raise ValueError("durations must be strictly positive")
    if events is None:
        evt = np.ones(dur.size, dtype=bool)
    else:
        evt = np.asarray(events, dtype=bool).ravel()
        if evt.size != dur.size:
            raise ValueError(
                f"events length {evt.size} does not match durations length {dur.size}"
            )
    return dur, evt


def check_in_unit_interval(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {value}")
    return value
