# python3
# geometry.py
# Pointwise algebra of the atom-cavity coupling for atoms held at definite
# (classical) positions.

# Positions are given as scaled coordinates u_i = k x_i.  Functions accept
# either a single configuration (shape (N,)) or a batch of configurations
# (shape (..., N)); the last axis always runs over atoms.
#
# The internal basis of the single-excitation manifold is ordered
# {|0>, |1> ... |N>}, where |0> holds the cavity photon and |i> has atom i
# excited.  In this basis the optical potential V(x) couples |0> <-> |i>
# with strength cos(u_i) (units of g) and has exactly two bright
# eigenvalues +/- chi(x); the other N-1 eigenvalues are zero (dark states).

from collections import namedtuple

import numpy as np
import scipy.linalg

from .core import NodeSingularityError, make_stick_spectrum

# chi^2 below this is treated as "every atom at a node"
NODE_CUTOFF = 1e-12

BrightPair = namedtuple("BrightPair", "chi plus_vector minus_vector dark_dim")


def as_positions(positions, n_atoms=None):
    u = np.asarray(positions, dtype=float)
    if u.ndim == 0:
        u = u.reshape(1)
    if n_atoms is not None and u.shape[-1] != n_atoms:
        raise ValueError(f"Expected positions for {n_atoms} atoms, got {u.shape[-1]}")
    return u


def _chi_squared(u):
    c = np.cos(u)
    return np.sum(c * c, axis=-1)


def _scalar_or_array(a):
    return float(a) if np.ndim(a) == 0 else a


def chi(positions):
    """Collective coupling sqrt(sum_i cos^2 u_i), in [0, sqrt(N)]."""
    u = as_positions(positions)
    return _scalar_or_array(np.sqrt(_chi_squared(u)))


def collective_terms(positions, cutoff=NODE_CUTOFF):
    """chi, zeta and a keep-mask for a batch of configurations.

    Configurations with chi^2 < cutoff have zeta set to 0 and keep == False;
    callers decide whether that is an error or a clipped sample.
    """
    u = as_positions(positions)
    n_atoms = u.shape[-1]
    c2 = np.cos(u) ** 2
    chi2 = np.sum(c2, axis=-1)
    keep = chi2 >= cutoff
    safe_chi2 = np.where(keep, chi2, 1.0)
    zeta_values = -(n_atoms - 1) / safe_chi2 + 1.0 - np.sum(c2 * c2, axis=-1) / (safe_chi2 * safe_chi2)
    zeta_values = np.where(keep, zeta_values, 0.0)
    return np.sqrt(chi2), zeta_values, keep


def zeta(positions, cutoff=NODE_CUTOFF):
    """Nonadiabatic correction functional

        zeta = -(N-1)/chi^2 + 1 - sum_i cos^4(u_i) / chi^4

    which multiplies the recoil energy in the gauge-kinetic term.  It is
    identically zero for a single atom and for all atoms at antinodes.
    Raises NodeSingularityError when chi^2 < cutoff.
    """
    u = as_positions(positions)
    _, zeta_values, keep = collective_terms(u, cutoff)
    if not np.all(keep):
        raise NodeSingularityError(
            f"chi^2 below node cutoff {cutoff:g}: zeta is singular at these positions"
        )
    return _scalar_or_array(zeta_values)


def optical_potential(positions):
    """(N+1)x(N+1) matrix V(x) in units of g over {|0>, |1> ... |N>}."""
    u = as_positions(positions)
    assert u.ndim == 1, f"optical_potential takes one configuration, got shape {u.shape}"
    n_atoms = len(u)
    v = np.zeros((n_atoms + 1, n_atoms + 1))
    v[0, 1:] = np.cos(u)
    v[1:, 0] = np.cos(u)
    return v


def bright_pair(positions, cutoff=NODE_CUTOFF):
    # Components are written down directly rather than obtained from an
    # eigensolver: D+/- = (|0> +/- sum_i (cos u_i / chi) |i>) / sqrt(2)
    u = as_positions(positions)
    assert u.ndim == 1, f"bright_pair takes one configuration, got shape {u.shape}"
    chi2 = float(_chi_squared(u))
    if chi2 < cutoff:
        raise NodeSingularityError(
            f"chi^2 = {chi2:g} below node cutoff {cutoff:g}: bright states are undefined"
        )
    chi_value = np.sqrt(chi2)
    direction = np.cos(u) / chi_value
    plus_vector = np.concatenate(([1.0], direction)) / np.sqrt(2.0)
    minus_vector = np.concatenate(([1.0], -direction)) / np.sqrt(2.0)
    return BrightPair(chi_value, plus_vector, minus_vector, len(u) - 1)


def dark_basis(positions):
    """Orthonormal columns spanning the null space of V(x).

    Every column has zero amplitude on |0>, so dark states cannot be
    reached from the cavity-photon state.
    """
    u = as_positions(positions)
    assert u.ndim == 1, f"dark_basis takes one configuration, got shape {u.shape}"
    atomic_null = scipy.linalg.null_space(np.cos(u)[np.newaxis, :])
    return np.vstack((np.zeros((1, atomic_null.shape[1])), atomic_null))


def tavis_cummings_sticks(n_atoms):
    """Fixed atoms at the antinode: two lines at +/- sqrt(N), weight 1/2 each."""
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    split = np.sqrt(n_atoms)
    return make_stick_spectrum([-split, split], [0.5, 0.5], "tavis_cummings")
