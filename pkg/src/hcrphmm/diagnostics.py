"""Mixing and model-quality metrics.

All metrics are pure functions.  Mutual information is reported in nats and
is invariant under relabelling of either sequence, which makes it usable on
arbitrarily labelled hidden-state samples.
"""

import warnings
from math import exp, inf, log

import numpy as np

ACT_MAX_LAG = 1000


class LengthMismatchError(ValueError):
    """The two label sequences do not have equal length."""


class ZeroVarianceError(ValueError):
    """Autocorrelation time of a constant series is undefined."""


def mutual_information(a, b):
    """Empirical mutual information (nats) between two label sequences."""
    if len(a) != len(b):
        raise LengthMismatchError("sequences differ in length: %d vs %d"
                                  % (len(a), len(b)))
    n = len(a)
    if n == 0:
        raise LengthMismatchError("sequences are empty")
    joint = {}
    left = {}
    right = {}
    for u, v in zip(a, b):
        joint[u, v] = joint.get((u, v), 0) + 1
        left[u] = left.get(u, 0) + 1
        right[v] = right.get(v, 0) + 1
    total = 0.0
    for (u, v), c in joint.items():
        p = c / n
        total += p * log(p * n * n / (left[u] * right[v]))
    return total


def autocorrelation_time(series, max_lag=ACT_MAX_LAG):
    """One half plus the summed autocorrelation function up to ``max_lag``."""
    x = np.asarray(series, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two values")
    mu = x.mean()
    var = x.var()
    if var == 0.0:
        raise ZeroVarianceError("constant series has no autocorrelation time")
    d = x - mu
    total = 0.5
    for lag in range(1, min(max_lag, x.size - 1) + 1):
        total += float(d[:-lag] @ d[lag:]) / ((x.size - lag) * var)
    return total


def perplexity(likelihood_rows):
    """Perplexity of held-out data from per-model likelihood rows.

    ``likelihood_rows[z][t]`` is the predictive likelihood of test symbol
    ``t`` under sampled model ``z``; rows are averaged across models before
    the geometric mean.  A position whose averaged likelihood is zero makes
    the perplexity infinite (a warning names the position).
    """
    rows = np.asarray(likelihood_rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.size == 0:
        raise ValueError("no likelihoods given")
    if (rows < 0).any():
        raise ValueError("negative likelihood")
    mean = rows.mean(axis=0)
    zeros = np.flatnonzero(mean == 0.0)
    if zeros.size:
        warnings.warn("zero predictive likelihood at position %d; perplexity "
                      "is infinite" % int(zeros[0]))
        return inf
    return exp(-float(np.log(mean).mean()))
