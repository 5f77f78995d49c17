"""Convergence and Monte Carlo error diagnostics."""
from __future__ import annotations

import numpy as np


def psrf(chain_matrix) -> float:
    """Gelman-Rubin potential scale reduction factor.

    ``chain_matrix`` is (m chains, n iterations) of a scalar functional.
    R = sqrt(((n-1)/n * W + B/n) / W) with W the mean within-chain variance
    and B = n * Var(chain means).  Identical constant chains define R = 1;
    zero within-chain variance with spread-out means gives +inf.
    """
    x = np.asarray(chain_matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 2:
        raise ValueError("need at least 2 chains of at least 2 iterations")
    m, n = x.shape
    within = float(np.mean(np.var(x, axis=1, ddof=1)))
    between = float(n * np.var(np.mean(x, axis=1), ddof=1))
    if within == 0.0:
        return 1.0 if between == 0.0 else np.inf
    var_hat = (n - 1) / n * within + between / n
    return float(np.sqrt(var_hat / within))


def mc_error(samples) -> float:
    """Batch-means standard error of the sample mean with floor(sqrt(n)) batches."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError("need at least 4 samples")
    n_batches = int(np.floor(np.sqrt(n)))
    batch_size = n // n_batches
    used = n_batches * batch_size
    means = x[:used].reshape(n_batches, batch_size).mean(axis=1)
    if np.all(means == means[0]):
        return 0.0
    return float(np.std(means, ddof=1) / np.sqrt(n_batches))


def lag1_autocorr(samples) -> float:
    """Sample lag-1 autocorrelation; defined as 0 for a constant series."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    d = x - x.mean()
    denom = float(np.sum(d * d))
    if denom == 0.0:
        return 0.0
    return float(np.sum(d[:-1] * d[1:]) / denom)


def mode_occupancy(samples, mode_classifier, labels=None) -> dict:
    """Normalized occupancy per mode label.

    ``mode_classifier`` maps one sample to a hashable label; ``labels``
    optionally fixes the key set (unvisited labels report 0).
    """
    counts = {}
    total = 0
    for s in samples:
        lab = mode_classifier(s)
        counts[lab] = counts.get(lab, 0) + 1
        total += 1
    if labels is not None:
        for lab in labels:
            counts.setdefault(lab, 0)
    if total == 0:
        return {k: 0.0 for k in counts}
    return {k: v / total for k, v in sorted(counts.items(), key=lambda kv: str(kv[0]))}
