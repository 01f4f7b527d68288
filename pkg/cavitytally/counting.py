# python3
# counting.py
# Atom-counting verdicts: can N and N+1 atoms be told apart from the red
# sideband of the transmission spectrum?

# N and N+1 are distinguishable when the shift of the red sideband mean
# exceeds the combined width of the peaks.  Intrinsic (motional/spatial)
# and extrinsic (cavity decay and other losses, kappa_ext) widths add in
# quadrature.  The intrinsic width is the larger RMS red width of the two
# atom numbers, times a configurable multiplier.

from collections import namedtuple
import logging
import math

import numpy as np
import scipy.optimize

from . import params as P
from .core import RED, CavityTallyError, ConfigError
from .helpers import is_monotonic_increasing
from .moments import DEFAULT_SAMPLES, mc_moments, perturbative_sideband, series_sideband

logger = logging.getLogger(__name__)

COUNTING_METHODS = ("series", "perturbative_mc", "spectrum")

Separation = namedtuple("Separation", "asymptotic exact")

# regime is "extrinsic", "intrinsic", "balanced" or "unbounded"
NMaxResult = namedtuple("NMaxResult", "value regime unbounded")

CountingReport = namedtuple(
    "CountingReport",
    "n_atoms separation asymptotic_separation intrinsic_width extrinsic_width combined_width "
    "distinguishable method width_multiplier"
)

Figure3Row = namedtuple(
    "Figure3Row",
    "epsilon mean_n_low halfwidth_n_low mean_n_high halfwidth_n_high overlap"
)
Figure3Table = namedtuple("Figure3Table", "n_pair recoil_ratio rows crossover")

Figure4Table = namedtuple("Figure4Table", "epsilon columns monotonic")


def separation(n, params):
    """Red-sideband shift between n and n+1 atoms.

    asymptotic is the large-N form sqrt((1+eps)/(8N)); exact is the
    difference of the series means, which is what verdicts use.
    """
    if n < 1:
        raise ConfigError("n_atoms", f"n_atoms must be ≥ 1, got {n}")
    eps = params.epsilon
    low = series_sideband(P.replace(params, n_atoms=n), RED)
    high = series_sideband(P.replace(params, n_atoms=n + 1), RED)
    return Separation(math.sqrt((1.0 + eps) / (8.0 * n)), low.mean - high.mean)


def n_max(epsilon, kappa_over_g):
    """Largest countable atom number (1+eps) / (8 k^2 + (1-eps)^2 (1+eps)/2), k = kappa_ext/g.

    Reported as a real.  The regime says which width dominates: extrinsic
    when 16 k^2 > (1-eps)^2.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ConfigError("epsilon", f"epsilon must be in [0, 1], got {epsilon!r}")
    if not kappa_over_g >= 0.0:
        raise ConfigError("kappa_ext", f"kappa_ext must be ≥ 0, got {kappa_over_g!r}")
    extrinsic = 16.0 * kappa_over_g ** 2
    intrinsic = (1.0 - epsilon) ** 2
    denominator = 8.0 * kappa_over_g ** 2 + 0.5 * (1.0 - epsilon) ** 2 * (1.0 + epsilon)
    if denominator == 0.0:
        return NMaxResult(math.inf, "unbounded", True)
    if extrinsic > intrinsic:
        regime = "extrinsic"
    elif extrinsic < intrinsic:
        regime = "intrinsic"
    else:
        regime = "balanced"
    return NMaxResult((1.0 + epsilon) / denominator, regime, False)


def _red_statistics_series(n, params, **_):
    prediction = series_sideband(P.replace(params, n_atoms=n), RED)
    return prediction.mean, prediction.variance


def _red_statistics_mc(n, params, n_samples=DEFAULT_SAMPLES, seed=0, workers=None, **_):
    p = P.replace(params, n_atoms=n)
    prediction = perturbative_sideband(mc_moments(p, n_samples, seed, workers=workers), p, RED)
    return prediction.mean, prediction.variance


def _red_statistics_spectrum(n, params, backend="fock", **_):
    # imported here, the spectrum route pulls in the sparse assembly
    from .hamiltonian import assemble, initial_state, make_basis
    from .spectra import split_sidebands, stick_spectrum

    p = P.replace(params, n_atoms=n)
    basis = make_basis(p, backend)
    red, _ = split_sidebands(stick_spectrum(assemble(p, basis), initial_state(p, basis)))
    if red.empty:
        raise CavityTallyError(f"red sideband is empty for N={n}")
    return red.mean, red.variance


_RED_STATISTICS = {
    "series": _red_statistics_series,
    "perturbative_mc": _red_statistics_mc,
    "spectrum": _red_statistics_spectrum,
}


def _rms(variance, n):
    if variance < 0.0:
        logger.warning(f"negative red variance {variance:.3e} at N={n} treated as zero width")
        return 0.0
    return math.sqrt(variance)


def counting_report(n, params, method="series", width_multiplier=1.0, **options):
    """Distinguishability of n and n+1 atoms by one of COUNTING_METHODS.

    options are passed to the route: n_samples, seed, workers for
    "perturbative_mc"; backend for "spectrum".
    """
    if method not in COUNTING_METHODS:
        raise ConfigError("method", f"expected one of {COUNTING_METHODS}, got {method!r}")
    if n < 1:
        raise ConfigError("n_atoms", f"n_atoms must be ≥ 1, got {n}")
    if not width_multiplier > 0:
        raise ConfigError("width_multiplier", f"width_multiplier must be > 0, got {width_multiplier!r}")
    statistics = _RED_STATISTICS[method]
    mean_low, var_low = statistics(n, params, **options)
    mean_high, var_high = statistics(n + 1, params, **options)
    shift = mean_low - mean_high
    intrinsic = width_multiplier * max(_rms(var_low, n), _rms(var_high, n + 1))
    extrinsic = params.kappa_ext
    combined = math.sqrt(intrinsic ** 2 + extrinsic ** 2)
    return CountingReport(
        n, shift, separation(n, params).asymptotic, intrinsic, extrinsic, combined,
        bool(shift > combined), method, width_multiplier
    )


def default_epsilon_grid(points=100):
    return np.linspace(0.0, 1.0, points + 1)[1:]


def _figure3_row(params, n_pair, epsilon):
    p = P.replace(params, epsilon=epsilon)
    low = series_sideband(P.replace(p, n_atoms=n_pair[0]), RED)
    high = series_sideband(P.replace(p, n_atoms=n_pair[1]), RED)
    half_low = math.sqrt(max(low.variance, 0.0)) / 2.0
    half_high = math.sqrt(max(high.variance, 0.0)) / 2.0
    gap = abs(low.mean - high.mean) - (half_low + half_high)
    return Figure3Row(epsilon, low.mean, half_low, high.mean, half_high, bool(gap < 0.0)), gap


def figure3_sweep(params, n_pair=(8, 9), epsilon_grid=None):
    """Red-sideband bands mean +/- sqrt(variance)/2 of two atom numbers against epsilon.

    crossover is the epsilon where the bands first touch coming down from
    the tight-trap end, or None if the grid never changes overlap state.
    """
    n_low, n_high = n_pair
    if not 1 <= n_low < n_high:
        raise ConfigError("n_pair", f"expected 1 ≤ low < high, got {n_pair}")
    grid = default_epsilon_grid() if epsilon_grid is None else np.asarray(epsilon_grid, dtype=float)
    if np.any(grid <= 0.0) or np.any(grid > 1.0):
        raise ConfigError("epsilon_grid", "every epsilon must be in (0, 1]")
    grid = np.sort(grid)
    results = [_figure3_row(params, n_pair, eps) for eps in grid]
    rows = [row for row, _ in results]
    gaps = [gap for _, gap in results]

    crossover = None
    for k in range(len(grid) - 1, 0, -1):
        if gaps[k] >= 0.0 > gaps[k - 1]:
            crossover = scipy.optimize.brentq(
                lambda eps: _figure3_row(params, n_pair, eps)[1], grid[k - 1], grid[k], xtol=1e-12
            )
            break
    if crossover is None:
        logger.info("overlap state never changes over the epsilon grid")
    return Figure3Table(n_pair, params.recoil_ratio, rows, crossover)


def kappa_column_name(kappa):
    return f"n_max_kappa_{kappa:g}"


def figure4_sweep(kappa_list, epsilon_grid=None):
    grid = default_epsilon_grid() if epsilon_grid is None else np.sort(np.asarray(epsilon_grid, dtype=float))
    columns = {}
    monotonic = {}
    for kappa in kappa_list:
        values = np.array([n_max(eps, kappa).value for eps in grid])
        name = kappa_column_name(kappa)
        columns[name] = values
        finite = values[np.isfinite(values)]
        monotonic[name] = is_monotonic_increasing(finite)
        if not monotonic[name]:
            logger.warning(f"{name} is not increasing in epsilon")
    return Figure4Table(grid, columns, monotonic)
