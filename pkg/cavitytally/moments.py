# python3
# moments.py
# Sideband means and variances without diagonalization.

# Two families of predictions are provided:
# + perturbative: first order in the recoil ratio r, fed with Gaussian
#   expectations of the collective functionals chi and zeta estimated by
#   Monte Carlo over the motional ground-state density (u_i ~ N(0, eta^2));
# + closed form: the 1/N series in epsilon, and its tight- and loose-trap
#   limits, written exactly as they are usually quoted.
#
# All energies are in units of g and measured from E0.  Only the blue
# branch of the perturbative expressions is usually written out; the red
# branch flips the sign of the g<chi> term in the mean and of the
# r-linear correction to the variance.

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging
import math

import numpy as np
import scipy.integrate
import scipy.stats
import scipy.stats.mstats

from .core import BLUE, RED, ConfigError, SamplingError, side_sign
from .geometry import collective_terms
from .helpers import batch_mean_error, relative_error

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1_000
DEFAULT_SAMPLES = 1_000_000
DEFAULT_BATCHES = 100

# clip samples with chi^2 below this fraction of N
DEFAULT_CUTOFF_FRACTION = 1e-6

# lower-tail fraction of zeta replaced by winsorization
WINSOR_FRACTION = 1e-3

# largest number of sampled positions (rows * atoms) held at once per batch
CHUNK_ELEMENTS = 4_000_000

# validity domains flagged on the closed-form limits
TIGHT_LIMIT_MAX_K_SIGMA_SQUARED = 0.2
LOOSE_LIMIT_MAX_EPSILON = 0.05

# relative tolerance for the loose-limit variance adjudication
ADJUDICATION_TOLERANCE = 0.05

MOMENT_FIELDS = ("e_chi", "e_chi2", "e_zeta", "e_zeta_chi", "e_zeta_chi2")

MomentEstimate = namedtuple("MomentEstimate", "estimate std_error")

# batch_means has shape (n_batches, 5), columns ordered as MOMENT_FIELDS
MomentEstimates = namedtuple(
    "MomentEstimates",
    "e_chi e_chi2 e_zeta e_zeta_chi e_zeta_chi2 e_zeta_winsorized "
    "n_samples n_clipped cutoff seed n_atoms eta batch_means"
)

# method is one of "perturbative_mc", "series_1_over_N", "tight_limit", "loose_limit".
# Errors are None for the closed forms.
SidebandPrediction = namedtuple("SidebandPrediction", "side mean variance mean_error variance_error method valid")

GaussianCosMoments = namedtuple("GaussianCosMoments", "mean_cos mean_cos2 mean_chi2 var_chi2")

CutoffSensitivity = namedtuple("CutoffSensitivity", "cutoff n_clipped e_zeta e_zeta_half_cutoff shift std_error sensitive")

LooseVarianceVerdict = namedtuple(
    "LooseVarianceVerdict",
    "n_atoms epsilon mc_variance std_error series_value loose_value series_error loose_error winner"
)


def default_cutoff(n_atoms):
    return DEFAULT_CUTOFF_FRACTION * n_atoms


def _batch_sizes(n_samples, n_batches):
    base, extra = divmod(n_samples, n_batches)
    return [base + (1 if b < extra else 0) for b in range(n_batches)]


def _sample_batch(rng, n_atoms, eta, size, cutoff):
    """Sums of the five functionals over one batch, plus the kept zeta values."""
    rows_per_chunk = max(1, CHUNK_ELEMENTS // n_atoms)
    sums = np.zeros(len(MOMENT_FIELDS))
    kept_zeta = []
    n_kept = 0
    remaining = size
    while remaining > 0:
        rows = min(rows_per_chunk, remaining)
        u = rng.normal(0.0, eta, size=(rows, n_atoms))
        chi, zeta, keep = collective_terms(u, cutoff)
        chi, zeta = chi[keep], zeta[keep]
        chi2 = chi * chi
        sums += (chi.sum(), chi2.sum(), zeta.sum(), (zeta * chi).sum(), (zeta * chi2).sum())
        kept_zeta.append(zeta)
        n_kept += len(chi)
        remaining -= rows
    return sums, n_kept, np.concatenate(kept_zeta)


def mc_moments(params, n_samples=DEFAULT_SAMPLES, seed=0, cutoff=None, n_batches=DEFAULT_BATCHES, workers=None):
    """Monte Carlo estimates of <chi>, <chi^2>, <zeta>, <zeta chi>, <zeta chi^2>.

    Every batch draws from its own stream spawned from seed, and batches are
    merged in index order, so the result depends on seed only and not on
    the number of worker threads.
    """
    if params.is_tight_limit:
        raise ConfigError("eta", "Monte Carlo sampling needs eta > 0")
    if n_samples < MIN_SAMPLES:
        raise ConfigError("n_samples", f"n_samples must be ≥ {MIN_SAMPLES}, got {n_samples}")
    if n_batches < 2 or n_batches > n_samples:
        raise ConfigError("n_batches", f"n_batches must be in [2, n_samples], got {n_batches}")
    n_atoms = params.n_atoms
    cutoff = default_cutoff(n_atoms) if cutoff is None else cutoff
    streams = np.random.SeedSequence(seed).spawn(n_batches)
    sizes = _batch_sizes(n_samples, n_batches)

    def run(b):
        return _sample_batch(np.random.default_rng(streams[b]), n_atoms, params.eta, sizes[b], cutoff)

    logger.info(f"Sampling {n_samples} configurations of {n_atoms} atoms in {n_batches} batches")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, range(n_batches)))

    batch_sums = np.array([r[0] for r in results])
    batch_kept = np.array([r[1] for r in results])
    n_kept = int(batch_kept.sum())
    n_clipped = n_samples - n_kept
    if n_kept == 0:
        raise SamplingError(f"all {n_samples} samples clipped at chi^2 cutoff {cutoff:g}")
    if np.any(batch_kept == 0):
        raise SamplingError(f"a batch has no samples above chi^2 cutoff {cutoff:g}; use more samples")
    if n_clipped > 0:
        logger.warning(f"clipped {n_clipped} of {n_samples} samples ({n_clipped / n_samples:.2e}) at chi^2 < {cutoff:g}")

    batch_means = batch_sums / batch_kept[:, np.newaxis]
    grand = batch_sums.sum(axis=0) / n_kept
    estimates = {
        name: MomentEstimate(float(grand[k]), batch_mean_error(batch_means[:, k]))
        for k, name in enumerate(MOMENT_FIELDS)
    }

    zeta_all = np.concatenate([r[2] for r in results])
    winsorized = scipy.stats.mstats.winsorize(zeta_all, limits=(WINSOR_FRACTION, 0.0))
    std = float(np.std(winsorized, ddof=1)) if len(zeta_all) > 1 else math.nan
    e_zeta_winsorized = MomentEstimate(float(np.mean(winsorized)), std / math.sqrt(len(zeta_all)))

    return MomentEstimates(
        n_samples=n_samples, n_clipped=n_clipped, cutoff=cutoff, seed=seed,
        n_atoms=n_atoms, eta=params.eta, batch_means=batch_means,
        e_zeta_winsorized=e_zeta_winsorized, **estimates
    )


def _perturbative_terms(e_chi, e_chi2, e_zeta, e_zeta_chi, e_zeta_chi2, recoil_ratio, sign):
    mean = sign * e_chi + 0.5 * recoil_ratio * e_zeta + 0.5 * recoil_ratio * (e_zeta * e_chi - e_zeta_chi) / e_chi
    variance = (e_chi2 - e_chi ** 2) + sign * recoil_ratio * (
        (e_zeta_chi2 + e_zeta * e_chi2) / e_chi - 2.0 * e_zeta * e_chi
    )
    return mean, variance


def perturbative_sideband(est, params, side):
    sign = side_sign(side)
    if est.n_atoms != params.n_atoms or est.eta != params.eta:
        raise ValueError(
            f"estimates are for N={est.n_atoms}, eta={est.eta}; params have N={params.n_atoms}, eta={params.eta}"
        )
    if est.e_chi.estimate - 3.0 * est.e_chi.std_error <= 0.0:
        raise SamplingError(
            f"<chi> = {est.e_chi.estimate:g} ± {est.e_chi.std_error:g} is consistent with zero"
        )
    grand = [getattr(est, name).estimate for name in MOMENT_FIELDS]
    mean, variance = _perturbative_terms(*grand, params.recoil_ratio, sign)
    per_batch = np.array([
        _perturbative_terms(*row, params.recoil_ratio, sign) for row in est.batch_means
    ])
    valid = est.n_clipped <= 0.01 * est.n_samples
    return SidebandPrediction(
        side, float(mean), float(variance),
        batch_mean_error(per_batch[:, 0]), batch_mean_error(per_batch[:, 1]),
        "perturbative_mc", valid
    )


def series_sideband(params, side):
    """Sideband mean and variance to leading orders in 1/N and r."""
    sign = side_sign(side)
    n, eps, r = params.n_atoms, params.epsilon, params.recoil_ratio
    mean = (
        sign * math.sqrt(n) * math.sqrt((1.0 + eps) / 2.0) * (1.0 - (1.0 - eps) ** 2 / (16.0 * n))
        - r * (1.0 - eps) / (2.0 * (1.0 + eps))
    )
    variance = (
        (1.0 - eps) ** 2 * (1.0 + eps) / 16.0
        + sign * r * (1.0 - eps) ** 2 * (3.0 + eps) / (4.0 * math.sqrt(n) * math.sqrt(2.0 * (1.0 + eps)))
    )
    return SidebandPrediction(side, mean, variance, None, None, "series_1_over_N", True)


def tight_limit(params, side):
    sign = side_sign(side)
    n, ks2, r = params.n_atoms, params.k_sigma_squared, params.recoil_ratio
    mean = sign * math.sqrt(n) * (1.0 - ks2 / 4.0) - 0.25 * r * ks2
    variance = ks2 ** 2 / 8.0 + sign * r * ks2 ** 2 / (2.0 * math.sqrt(n))
    return SidebandPrediction(side, mean, variance, None, None, "tight_limit", ks2 <= TIGHT_LIMIT_MAX_K_SIGMA_SQUARED)


def loose_limit(params, side):
    # reproduces the quoted loose-trap expressions, variance constant 1/8 and
    # mean offset +r/2 included, although the series gives 1/16 and -r/2
    sign = side_sign(side)
    n, r = params.n_atoms, params.recoil_ratio
    mean = sign * math.sqrt(n / 2.0) * (1.0 - 1.0 / (16.0 * n)) + 0.5 * r
    variance = 1.0 / 8.0 + sign * 3.0 * r / (4.0 * math.sqrt(2.0 * n))
    return SidebandPrediction(side, mean, variance, None, None, "loose_limit", params.epsilon <= LOOSE_LIMIT_MAX_EPSILON)


def all_predictions(params, est=None):
    """Every available prediction for both sides, perturbative ones only when est is given."""
    predictions = []
    for side in (RED, BLUE):
        if est is not None:
            predictions.append(perturbative_sideband(est, params, side))
        predictions.append(series_sideband(params, side))
        predictions.append(tight_limit(params, side))
        predictions.append(loose_limit(params, side))
    return predictions


def gaussian_cos_moments(params):
    """Closed-form Gaussian expectations used as sampling and sum-rule oracles."""
    eps = params.epsilon
    n = params.n_atoms
    return GaussianCosMoments(
        mean_cos=math.exp(-0.5 * params.eta ** 2),
        mean_cos2=0.5 * (1.0 + eps),
        mean_chi2=0.5 * n * (1.0 + eps),
        var_chi2=n * (1.0 - eps * eps) ** 2 / 8.0,
    )


def gaussian_expectation(func, eta):
    """<func(u)> for u ~ N(0, eta^2) by adaptive quadrature."""
    if eta == 0.0:
        return float(func(0.0))
    value, _ = scipy.integrate.quad(
        lambda u: func(u) * scipy.stats.norm.pdf(u, scale=eta),
        -12.0 * eta, 12.0 * eta, limit=400
    )
    return value


def cutoff_sensitivity(params, n_samples=DEFAULT_SAMPLES, seed=0, cutoff=None, workers=None):
    """Change of <zeta> when the chi^2 cutoff is halved, on the same samples."""
    cutoff = default_cutoff(params.n_atoms) if cutoff is None else cutoff
    full = mc_moments(params, n_samples, seed, cutoff, workers=workers)
    half = mc_moments(params, n_samples, seed, cutoff / 2.0, workers=workers)
    shift = half.e_zeta.estimate - full.e_zeta.estimate
    std_error = full.e_zeta.std_error
    sensitive = abs(shift) >= std_error if std_error > 0 else shift != 0.0
    if sensitive:
        logger.warning(f"<zeta> moves by {shift:.3e} (std error {std_error:.3e}) when the cutoff is halved")
    return CutoffSensitivity(cutoff, full.n_clipped, full.e_zeta, half.e_zeta, shift, std_error, sensitive)


def adjudicate_loose_variance(params, n_samples=200_000, seed=0, workers=None):
    """Decide which loose-trap sideband variance the sampled Var(chi) supports.

    Candidates are the series value (1-eps)^2 (1+eps)/16 and the quoted
    loose-limit constant 1/8.  winner is "series_1_over_16", "loose_1_over_8"
    or None when the sample matches neither or both within tolerance.
    """
    est = mc_moments(params, n_samples, seed, workers=workers)
    variance = est.e_chi2.estimate - est.e_chi.estimate ** 2
    batch_variance = est.batch_means[:, 1] - est.batch_means[:, 0] ** 2
    eps = params.epsilon
    series_value = (1.0 - eps) ** 2 * (1.0 + eps) / 16.0
    loose_value = 1.0 / 8.0
    series_error = relative_error(variance, series_value)
    loose_error = relative_error(variance, loose_value)
    matches = [
        name for name, err in (("series_1_over_16", series_error), ("loose_1_over_8", loose_error))
        if err <= ADJUDICATION_TOLERANCE
    ]
    winner = matches[0] if len(matches) == 1 else None
    logger.info(f"sampled Var(chi) = {variance:.5f}; series {series_value:.5f}, loose {loose_value:.5f}: {winner}")
    return LooseVarianceVerdict(
        params.n_atoms, eps, variance, batch_mean_error(batch_variance),
        series_value, loose_value, series_error, loose_error, winner
    )
