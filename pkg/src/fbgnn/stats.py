"""Small statistics helpers for the Monte-Carlo harness."""

from __future__ import annotations

import numpy as np


def wilson_ci(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
    return (float(max(0.0, center - half)), float(min(1.0, center + half)))


def paired_ratio_ci(n_both: int, n_only_a: int, n_only_b: int, n_neither: int,
                    n_boot: int = 10_000, seed: int = 0,
                    level: float = 0.95) -> tuple[float, float, float]:
    """Bootstrap CI for the failure-rate ratio B/A of two decoders run on the
    same trials.

    The four counts are the cells of the paired outcome table (both fail, only
    A fails, only B fails, neither).  Returns (ratio, lo, hi); replicates with
    an empty A-failure set are pushed to +inf.
    """
    counts = np.array([n_both, n_only_a, n_only_b, n_neither], dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        raise ValueError("no trials")
    fails_a = n_both + n_only_a
    fails_b = n_both + n_only_b
    ratio = np.inf if fails_a == 0 else fails_b / fails_a
    rng = np.random.Generator(np.random.Philox(key=seed))
    reps = rng.multinomial(total, counts / total, size=n_boot)
    rep_a = reps[:, 0] + reps[:, 1]
    rep_b = reps[:, 0] + reps[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        rep_ratio = np.where(rep_a > 0, rep_b / np.maximum(rep_a, 1), np.inf)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(rep_ratio, [alpha, 1.0 - alpha])
    return float(ratio), float(lo), float(hi)
