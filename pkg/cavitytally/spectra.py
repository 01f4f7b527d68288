# python3
# spectra.py
# Golden-rule stick spectrum of the single-excitation manifold, its split
# into red and blue sidebands, Lorentzian broadening and spectral moments.

# Line frequencies are eigenvalues of the manifold operator measured from
# the motional zero-point energy E0, and line weights are overlaps
# |<Psi_j|Psi_I>|^2 with the state reached by injecting one photon into the
# cavity.  Two routes give the same StickSpectrum type:
# + dense diagonalization for operators up to DENSE_LIMIT dimensions;
# + Lanczos tridiagonalization seeded with Psi_I above that, whose Ritz
#   lines reproduce the spectral moments up to order 2*iterations - 1.

from collections import namedtuple
import logging
import math

import numpy as np
import scipy.linalg
import scipy.stats

from .core import BLUE, RED, ConfigError, ConvergenceError, SidebandSummary, make_stick_spectrum
from .geometry import NODE_CUTOFF
from .helpers import weighted_moments
from .hamiltonian import GRID_BACKEND

logger = logging.getLogger(__name__)

DENSE_LIMIT = 10_000
DEFAULT_LANCZOS_ITERATIONS = 200

# Lines lighter than this (relative to total weight) are dropped
WEIGHT_CUTOFF = 1e-12

# A sideband lighter than this is reported as empty
EMPTY_SIDEBAND_WEIGHT = 1e-6

EIGEN_RESIDUAL_TOLERANCE = 1e-8
SEED_NORM_TOLERANCE = 1e-10

# Default broadening grid extends this many kernel widths past the outer lines
GRID_MARGIN_WIDTHS = 20.0
MIN_GRID_POINTS = 4001
MAX_GRID_POINTS = 200_001

# largest lines x grid points kernel block evaluated at once
KERNEL_ELEMENTS = 4_000_000

BroadenedSpectrum = namedtuple("BroadenedSpectrum", "omega_grid intensity kernel_width covers_all_lines")

SpectralMoments = namedtuple("SpectralMoments", "side total_weight raw central")

ProjectionDiagnostics = namedtuple("ProjectionDiagnostics", "omega weight pi_plus pi_minus agreement")


def _check_dimensions(op, psi_i):
    if len(psi_i.vector) != op.dim:
        raise ValueError(f"initial state has dimension {len(psi_i.vector)}, operator {op.dim}")


def _keep_weighty(omega, weight, origin):
    total = float(np.sum(weight))
    keep = weight >= WEIGHT_CUTOFF * max(total, 1.0)
    logger.debug(f"{origin}: kept {np.count_nonzero(keep)} of {len(weight)} lines")
    return make_stick_spectrum(omega[keep], weight[keep], origin)


def _dense_eigensystem(op, psi_i):
    matrix = op.matrix.toarray()
    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"dense eigensolver failed for dimension {op.dim}: {e}")
    overlaps = vectors.T @ psi_i.vector
    weight = overlaps * overlaps
    keep = weight >= WEIGHT_CUTOFF
    if np.any(keep):
        residual = matrix @ vectors[:, keep] - vectors[:, keep] * values[keep]
        worst = float(np.max(np.linalg.norm(residual, axis=0)))
        scale = max(1.0, float(np.max(np.abs(values))))
        if worst > EIGEN_RESIDUAL_TOLERANCE * scale:
            raise ConvergenceError(f"eigenvector residual {worst:.3e} exceeds {EIGEN_RESIDUAL_TOLERANCE * scale:.3e}")
    return values, vectors, weight


def stick_spectrum(op, psi_i, iterations=None):
    _check_dimensions(op, psi_i)
    if op.dim > DENSE_LIMIT:
        steps = min(op.dim, iterations or DEFAULT_LANCZOS_ITERATIONS)
        logger.info(f"Dimension {op.dim} above dense limit {DENSE_LIMIT}: {steps} Lanczos iterations")
        return lanczos_spectrum(op, psi_i, steps)
    logger.info(f"Dense diagonalization at dimension {op.dim}")
    values, _, weight = _dense_eigensystem(op, psi_i)
    return _keep_weighty(values - op.zero_point_energy, weight, "exact_diag")


def lanczos_coefficients(matrix, seed, iterations, reorthogonalize=True):
    """Diagonal (alpha) and off-diagonal (beta) Lanczos coefficients.

    Stops early on an invariant Krylov subspace, in which case fewer than
    iterations alphas are returned.
    """
    n = matrix.shape[0]
    basis = np.zeros((n, iterations)) if reorthogonalize else None
    alphas = []
    betas = []
    q = seed / np.linalg.norm(seed)
    q_prev = np.zeros(n)
    beta = 0.0
    scale = 0.0
    for j in range(iterations):
        if basis is not None:
            basis[:, j] = q
        w = matrix @ q
        alpha = float(np.dot(q, w))
        alphas.append(alpha)
        scale = max(scale, abs(alpha), beta)
        if j == iterations - 1:
            break
        w = w - alpha * q - beta * q_prev
        if basis is not None:
            # full reorthogonalization, applied twice
            for _ in range(2):
                w -= basis[:, :j + 1] @ (basis[:, :j + 1].T @ w)
        beta = float(np.linalg.norm(w))
        if beta <= 1e-12 * max(scale, 1.0):
            logger.debug(f"Lanczos breakdown after {j + 1} iterations (invariant subspace)")
            break
        betas.append(beta)
        q_prev = q
        q = w / beta
    return np.array(alphas), np.array(betas)


def lanczos_spectrum(op, psi_i, iterations, reorthogonalize=True):
    _check_dimensions(op, psi_i)
    if not 1 <= iterations <= op.dim:
        raise ValueError(f"iterations must be in [1, {op.dim}], got {iterations}")
    norm = float(np.linalg.norm(psi_i.vector))
    if abs(norm - 1.0) > SEED_NORM_TOLERANCE:
        raise ValueError(f"initial state must have unit norm, got {norm!r}")
    alphas, betas = lanczos_coefficients(op.matrix, psi_i.vector, iterations, reorthogonalize)
    if len(alphas) == 1:
        ritz_values, first_components = alphas, np.ones(1)
    else:
        ritz_values, ritz_vectors = scipy.linalg.eigh_tridiagonal(alphas, betas)
        first_components = ritz_vectors[0, :]
    return _keep_weighty(ritz_values - op.zero_point_energy, first_components ** 2, "lanczos_seed")


def _empty_summary(side, weight, method):
    return SidebandSummary(side, weight, None, None, method, True)


def _side_masks(omega):
    return {RED: omega < 0.0, BLUE: omega > 0.0}


def split_sidebands(s, method="spectrum"):
    """(red, blue) summaries, lines classified by the sign of their frequency."""
    at_zero = float(np.sum(s.weight[s.omega == 0.0]))
    if at_zero > 0.0:
        logger.warning(f"weight {at_zero:.3e} at exactly zero frequency belongs to neither sideband")
    summaries = []
    for side, mask in _side_masks(s.omega).items():
        weight = float(np.sum(s.weight[mask]))
        if weight < EMPTY_SIDEBAND_WEIGHT:
            summaries.append(_empty_summary(side, weight, method))
            continue
        _, central = weighted_moments(s.omega[mask], s.weight[mask], 2)
        mean = float(np.dot(s.weight[mask], s.omega[mask])) / weight
        summaries.append(SidebandSummary(side, weight, mean, central[2], method, False))
    return tuple(summaries)


def _resolve_grid(s, kappa_ext, grid):
    if grid is None:
        if s.n_lines == 0:
            lo, hi = -GRID_MARGIN_WIDTHS * kappa_ext, GRID_MARGIN_WIDTHS * kappa_ext
        else:
            lo = float(s.omega[0]) - GRID_MARGIN_WIDTHS * kappa_ext
            hi = float(s.omega[-1]) + GRID_MARGIN_WIDTHS * kappa_ext
        wanted = max(MIN_GRID_POINTS, int(math.ceil(10.0 * (hi - lo) / kappa_ext)) + 1)
        if wanted > MAX_GRID_POINTS:
            logger.warning(
                f"{wanted} grid points needed to resolve kappa_ext={kappa_ext:g} over [{lo:g}, {hi:g}]; "
                f"using {MAX_GRID_POINTS}, pass an explicit grid for finer sampling"
            )
        return np.linspace(lo, hi, min(wanted, MAX_GRID_POINTS))
    if isinstance(grid, tuple) and len(grid) == 3:
        start, stop, points = float(grid[0]), float(grid[1]), int(grid[2])
        if points < 2 or not stop > start:
            raise ConfigError("omega_range", f"expected start < stop and at least 2 points, got {grid}")
        return np.linspace(start, stop, points)
    omega_grid = np.asarray(grid, dtype=float)
    if omega_grid.ndim != 1 or len(omega_grid) < 2 or np.any(np.diff(omega_grid) <= 0):
        raise ConfigError("omega_range", "an explicit grid needs at least 2 strictly increasing frequencies")
    return omega_grid


def convolve(s, kappa_ext, grid=None):
    """Superpose a normalized Lorentzian of half-width kappa_ext on every line.

    grid is None (automatic), a (start, stop, points) tuple or an array of
    frequencies.
    """
    if not kappa_ext > 0:
        raise ConfigError("kappa_ext", f"broadening needs kappa_ext > 0, got {kappa_ext!r}")
    omega_grid = _resolve_grid(s, kappa_ext, grid)
    intensity = np.zeros_like(omega_grid)
    chunk = max(1, KERNEL_ELEMENTS // len(omega_grid))
    for start in range(0, s.n_lines, chunk):
        centres = s.omega[start:start + chunk]
        weights = s.weight[start:start + chunk]
        kernel = scipy.stats.cauchy.pdf(omega_grid[np.newaxis, :], loc=centres[:, np.newaxis], scale=kappa_ext)
        intensity += weights @ kernel
    covers = bool(s.n_lines == 0 or (s.omega[0] >= omega_grid[0] and s.omega[-1] <= omega_grid[-1]))
    if not covers:
        logger.warning(
            f"broadening grid [{omega_grid[0]:g}, {omega_grid[-1]:g}] does not cover lines "
            f"[{s.omega[0]:g}, {s.omega[-1]:g}]"
        )
    return BroadenedSpectrum(omega_grid, intensity, kappa_ext, covers)


def grid_weight_fraction(s, broadened):
    """Weight the Lorentzian lines put inside the broadening grid."""
    lo, hi = broadened.omega_grid[0], broadened.omega_grid[-1]
    inside = (
        scipy.stats.cauchy.cdf(hi, loc=s.omega, scale=broadened.kernel_width)
        - scipy.stats.cauchy.cdf(lo, loc=s.omega, scale=broadened.kernel_width)
    )
    return float(np.dot(s.weight, inside))


def spectral_moments(s, order=4):
    """Raw and central moments per side ("red", "blue") and of the whole spectrum ("all")."""
    if not 1 <= order <= 4:
        raise ValueError(f"order must be in [1, 4], got {order}")
    masks = {"all": np.ones(s.n_lines, dtype=bool)}
    masks.update(_side_masks(s.omega))
    moments = {}
    for side, mask in masks.items():
        weight = float(np.sum(s.weight[mask]))
        raw, central = weighted_moments(s.omega[mask], s.weight[mask], order)
        moments[side] = SpectralMoments(side, weight, raw, central)
    return moments


def projection_diagnostics(op, psi_i):
    """Bright-state projections <Pi+>, <Pi-> of every weighted eigenstate.

    Grid backend only: there positions are diagonal, so the bright states
    D+/-(x) can be applied configuration by configuration.  agreement is
    the weight fraction of lines whose frequency sign (blue for omega > 0)
    matches the larger projection.
    """
    _check_dimensions(op, psi_i)
    basis = op.basis
    if basis.backend != GRID_BACKEND:
        raise ValueError(f"projection diagnostics need the {GRID_BACKEND} backend, got {basis.backend}")
    values, vectors, weight = _dense_eigensystem(op, psi_i)
    keep = weight >= WEIGHT_CUTOFF
    values, vectors, weight = values[keep], vectors[:, keep], weight[keep]

    n_atoms, d = basis.n_atoms, basis.per_atom_dim
    configs = np.stack(np.unravel_index(np.arange(d ** n_atoms), (d,) * n_atoms), axis=-1)
    cosines = np.cos(basis.grid[configs])
    chi_values = np.sqrt(np.sum(cosines ** 2, axis=-1))
    regular = chi_values ** 2 >= NODE_CUTOFF
    direction = np.where(regular[:, np.newaxis], cosines / np.where(regular, chi_values, 1.0)[:, np.newaxis], 0.0)

    # amplitudes indexed [internal state, configuration, line]
    amplitudes = vectors.reshape(n_atoms + 1, d ** n_atoms, -1)
    atomic = np.einsum("ci,icl->cl", direction, amplitudes[1:])
    photon = amplitudes[0] * regular[:, np.newaxis]
    pi_plus = np.sum((photon + atomic) ** 2, axis=0) / 2.0
    pi_minus = np.sum((photon - atomic) ** 2, axis=0) / 2.0

    omega = values - op.zero_point_energy
    agrees = (omega > 0) == (pi_plus > pi_minus)
    agreement = float(np.dot(weight, agrees) / np.sum(weight))
    logger.info(f"Pi+/- classification agrees with frequency sign for {agreement:.4f} of the weight")
    return ProjectionDiagnostics(omega, weight, pi_plus, pi_minus, agreement)
