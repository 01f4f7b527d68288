# python3
# helpers.py
# Small numeric helpers shared by spectra, moments and counting.

import math

import numpy as np


def weighted_moments(values, weights, order):
    """Raw and central moments 0..order of a weighted point set.

    Moments are normalized by the total weight, so raw[0] == central[0] == 1.
    Returns (None, None) when the total weight is zero.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    total = float(np.sum(weights))
    if total <= 0.0:
        return None, None
    mean = float(np.dot(weights, values)) / total
    raw = tuple(float(np.dot(weights, values ** k)) / total for k in range(order + 1))
    central = tuple(float(np.dot(weights, (values - mean) ** k)) / total for k in range(order + 1))
    return raw, central


def batch_mean_error(batch_values):
    """Standard error of the grand mean from independent batch values."""
    batch_values = np.asarray(batch_values, dtype=float)
    n = len(batch_values)
    if n < 2:
        return math.nan
    return float(np.std(batch_values, ddof=1) / math.sqrt(n))


def is_monotonic_increasing(values, strict=True):
    diffs = np.diff(np.asarray(values, dtype=float))
    return bool(np.all(diffs > 0) if strict else np.all(diffs >= 0))


def relative_error(value, reference):
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)
