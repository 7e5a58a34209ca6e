"""Seeded corruption of data matrices: Gaussian noise at a target SNR,
and salt-and-pepper flips to the value bounds.

Everything is a pure function of (matrix, spec); the seed lives in the spec,
so identical inputs always corrupt identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CorruptionSpec",
    "add_gaussian_snr",
    "add_salt_pepper",
    "apply_corruption",
]

CORRUPTION_KINDS = ("none", "gaussian_snr", "salt_pepper")


@dataclass(frozen=True)
class CorruptionSpec:
    """What to corrupt with: kind plus the parameter that kind reads.

    gaussian_snr uses snr_db (signal-to-noise power ratio in dB);
    salt_pepper uses ratio (fraction of entries forced to a bound).
    value_range bounds the output either way.
    """

    kind: str = "none"
    snr_db: float | None = None
    ratio: float | None = None
    value_range: tuple = (0.0, 1.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in CORRUPTION_KINDS:
            raise ValueError(f"kind must be one of {CORRUPTION_KINDS}, got {self.kind!r}")
        low, high = self.value_range
        if not low < high:
            raise ValueError(f"value_range must satisfy low < high, got {self.value_range}")
        if self.kind == "gaussian_snr":
            if self.snr_db is None or not math.isfinite(self.snr_db):
                raise ValueError("gaussian_snr needs a finite snr_db")
        if self.kind == "salt_pepper":
            if self.ratio is None or not 0.0 <= self.ratio <= 1.0:
                raise ValueError(f"salt_pepper needs ratio in [0, 1], got {self.ratio}")


def _gaussian_noised(X: np.ndarray, spec: CorruptionSpec) -> np.ndarray:
    signal_power = float(np.mean(X**2))
    if signal_power == 0.0:
        raise ValueError("signal power is zero; SNR is undefined")
    noise_var = signal_power / 10.0 ** (spec.snr_db / 10.0)
    rng = np.random.default_rng(spec.seed)
    return X + rng.normal(0.0, math.sqrt(noise_var), size=X.shape)


def add_gaussian_snr(X: np.ndarray, spec: CorruptionSpec) -> np.ndarray:
    """Add white Gaussian noise sized so signal power / noise power hits the SNR.

    Signal power is the mean squared entry of X. The sum is clipped back to
    value_range, which at low SNR discards some noise mass; apply_corruption
    reports how many entries were clipped.
    """
    if spec.kind != "gaussian_snr":
        raise ValueError(f"spec.kind is {spec.kind!r}, expected 'gaussian_snr'")
    X = np.asarray(X, dtype=float)
    low, high = spec.value_range
    return np.clip(_gaussian_noised(X, spec), low, high)


def add_salt_pepper(X: np.ndarray, spec: CorruptionSpec) -> np.ndarray:
    """Force floor(ratio * m * n) distinct entries to a bound, half low half high.

    Positions are drawn uniformly without replacement; each chosen position is
    set to low or high with equal probability. "Affected" counts positions,
    not changed values: an entry already at a bound still counts as corrupted.
    """
    if spec.kind != "salt_pepper":
        raise ValueError(f"spec.kind is {spec.kind!r}, expected 'salt_pepper'")
    X = np.asarray(X, dtype=float)
    out = X.copy()
    total = X.size
    count = int(spec.ratio * total)
    if count == 0:
        return out
    rng = np.random.default_rng(spec.seed)
    positions = rng.choice(total, size=count, replace=False)
    low, high = spec.value_range
    values = np.where(rng.integers(0, 2, size=count) == 1, high, low)
    out.flat[positions] = values
    return out


def apply_corruption(X: np.ndarray, spec: CorruptionSpec):
    """Dispatch on spec.kind; returns (corrupted matrix, info dict).

    The info dict carries whatever downstream reporting wants to know:
    clipped entry count for gaussian_snr, corrupted position count for
    salt_pepper. kind='none' returns X untouched.
    """
    if spec.kind == "none":
        return X, {}
    X = np.asarray(X, dtype=float)
    if spec.kind == "gaussian_snr":
        noised = _gaussian_noised(X, spec)
        low, high = spec.value_range
        clipped = int(np.sum((noised < low) | (noised > high)))
        return np.clip(noised, low, high), {"clipped_entries": clipped}
    out = add_salt_pepper(X, spec)
    return out, {"corrupted_entries": int(spec.ratio * X.size)}
