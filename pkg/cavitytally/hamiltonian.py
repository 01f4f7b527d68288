# python3
# hamiltonian.py
# Exact Hamiltonian of the single-excitation (n_T = 1) manifold over a
# truncated motional basis, and the initial state a^dagger |Psi_0>.

# Basis ordering
# --------------
# A basis index is  s * D + m  where s in 0..N is the internal state
# (s == 0: photon in the cavity, s == i: atom i excited) and m runs over the
# motional product basis of dimension D = d**N, atom 0 being the slowest
# varying factor.  The operator therefore has (N+1) x (N+1) blocks of size
# D: the diagonal blocks all hold H0 (trap energies), and blocks (0, i) /
# (i, 0) hold cos(u_i) acting on atom i.  The constant photon/atomic
# excitation energy (omega_c == omega_a) is dropped, so the spectrum is
# measured from the empty cavity resonance.
#
# Two interchangeable motional backends are provided:
# + "fock": harmonic oscillator eigenstates of each atom's trap, u = eta (a + a^dagger).
#   The initial motional state is exactly a basis vector.
# + "grid": sinc / Colbert-Miller collocation on u in [-L, L].  cos(u) is
#   diagonal, which makes position-resolved diagnostics cheap.

from collections import namedtuple
import functools
import logging
import math

import numpy as np
import scipy.sparse
import scipy.special

from . import config_adaptors as CA
from .core import BudgetExceededError, ConfigError, GridBoxError, TruncationError

logger = logging.getLogger(__name__)

FOCK_BACKEND = "fock"
GRID_BACKEND = "grid"
BACKENDS = CA.backend_choice.choices

# Refuse to assemble operators expected to hold more nonzeros than this
DEFAULT_MAX_NONZEROS = 5_000_000

# Factorial ratios and Laguerre values stay inside double precision range
# up to here when combined in the log domain
MAX_FOCK_DIM = 400

# Fock elements of cos below this magnitude are not stored
FOCK_ELEMENT_FLOOR = 1e-15

# Tolerated relative loss of <0|cos^2|0> through basis truncation
TRUNCATION_TOLERANCE = 1e-8

# Tolerated ground-state probability outside the grid box
GRID_BOX_TOLERANCE = 1e-8

MotionalBasis = namedtuple("MotionalBasis", "backend n_atoms per_atom_dim total_dim grid")

InitialState = namedtuple("InitialState", "vector description")

_ManifoldOperatorBase = namedtuple("ManifoldOperator", "matrix basis params zero_point_energy")


class ManifoldOperator(_ManifoldOperatorBase):
    __slots__ = ()

    @property
    def dim(self):
        return self.matrix.shape[0]


def cos_matrix_fock(eta, dim):
    """Matrix elements <m| cos(eta (a + a^dagger)) |n> for m, n < dim.

    From the displacement operator identity, for m >= n

        <m|cos|n> = (-1)^((m-n)/2) e^(-eta^2/2) sqrt(n!/m!) eta^(m-n) L_n^(m-n)(eta^2)

    when m-n is even, and 0 when it is odd.  The prefactor and the Laguerre
    value are combined in the log domain.
    """
    if not eta > 0:
        raise ValueError(f"cos_matrix_fock needs eta > 0, got {eta}")
    if dim < 2:
        raise ValueError(f"cos_matrix_fock needs dim >= 2, got {dim}")
    if dim > MAX_FOCK_DIM:
        raise TruncationError(
            f"Fock dimension {dim} exceeds {MAX_FOCK_DIM}: factorial ratios overflow double precision"
        )
    x = eta * eta
    index = np.arange(dim)
    hi = np.maximum(index[:, np.newaxis], index[np.newaxis, :])
    lo = np.minimum(index[:, np.newaxis], index[np.newaxis, :])
    delta = hi - lo
    laguerre = scipy.special.eval_genlaguerre(lo, delta, x)
    with np.errstate(divide="ignore"):
        log_magnitude = (
            0.5 * (scipy.special.gammaln(lo + 1.0) - scipy.special.gammaln(hi + 1.0))
            + delta * math.log(eta) - 0.5 * x
            + np.log(np.abs(laguerre))
        )
    parity = np.where(delta % 2 == 0, np.where((delta // 2) % 2 == 0, 1.0, -1.0), 0.0)
    elements = parity * np.sign(laguerre) * np.exp(log_magnitude)
    if not np.all(np.isfinite(elements)):
        raise TruncationError(f"Non-finite cos matrix element for eta={eta}, dim={dim}")
    return elements


def fock_truncation_deficit(eta, dim):
    """Relative part of <0|cos^2 u|0> = (1 + eps)/2 lost by truncating at dim."""
    column = cos_matrix_fock(eta, dim)[:, 0]
    exact = 0.5 * (1.0 + math.exp(-2.0 * eta * eta))
    return (exact - float(np.dot(column, column))) / exact


def suggest_fock_dim(eta, tolerance=TRUNCATION_TOLERANCE):
    for dim in range(2, MAX_FOCK_DIM + 1):
        if fock_truncation_deficit(eta, dim) < tolerance:
            return dim
    raise TruncationError(f"No Fock dimension up to {MAX_FOCK_DIM} reaches tolerance {tolerance:g} at eta={eta}")


def make_basis(params, backend=FOCK_BACKEND):
    backend = CA.backend_choice.adapt("backend", backend)
    if params.is_tight_limit:
        raise ConfigError("eta", "numeric backends need eta > 0 (eta == 0 is the closed-form tight-trap limit)")
    n_atoms = params.n_atoms
    if backend == FOCK_BACKEND:
        d = params.n_max_fock
        deficit = fock_truncation_deficit(params.eta, d)
        if deficit > TRUNCATION_TOLERANCE:
            raise TruncationError(
                f"n_max_fock={d} loses {deficit:.2e} of <cos^2> at eta={params.eta:g}; "
                f"use n_max_fock={suggest_fock_dim(params.eta)} or more"
            )
        grid = None
    else:
        d = params.grid_points
        half_width = params.grid_halfwidth
        grid = np.linspace(-half_width, half_width, d)
        outside = scipy.special.erfc(half_width / (params.eta * math.sqrt(2.0)))
        if outside > GRID_BOX_TOLERANCE:
            raise GridBoxError(
                f"grid_halfwidth={half_width:g} leaves {outside:.2e} of the ground state outside the box"
            )
        spacing = grid[1] - grid[0]
        if spacing > params.eta:
            raise GridBoxError(
                f"grid spacing {spacing:.3g} exceeds the ground-state width eta={params.eta:g}; "
                "increase grid_points"
            )
    return MotionalBasis(backend, n_atoms, d, (n_atoms + 1) * d ** n_atoms, grid)


def sinc_dvr_kinetic(grid, recoil_ratio):
    """Colbert-Miller kinetic matrix for -r d^2/du^2 on a uniform grid."""
    spacing = grid[1] - grid[0]
    index = np.arange(len(grid))
    offset = index[:, np.newaxis] - index[np.newaxis, :]
    with np.errstate(divide="ignore"):
        off_diagonal = 2.0 * np.where(offset % 2 == 0, 1.0, -1.0) / (offset * offset)
    kinetic = np.where(offset == 0, math.pi ** 2 / 3.0, off_diagonal)
    return kinetic * recoil_ratio / spacing ** 2


def single_atom_operators(params, basis):
    """Per-atom trap Hamiltonian H0_i and cos(u_i) in the chosen backend."""
    d = basis.per_atom_dim
    if basis.backend == FOCK_BACKEND:
        h0 = np.diag(params.trap_frequency * (np.arange(d) + 0.5))
        cos_u = cos_matrix_fock(params.eta, d)
        cos_u[np.abs(cos_u) < FOCK_ELEMENT_FLOOR] = 0.0
    else:
        # trap potential (1/2) m omega0^2 x^2 is r u^2 / (4 eta^4) in these units
        u = basis.grid
        h0 = sinc_dvr_kinetic(u, params.recoil_ratio)
        h0[np.diag_indices(d)] += params.recoil_ratio * u * u / (4.0 * params.eta ** 4)
        cos_u = np.diag(np.cos(u))
    return h0, cos_u


def _embed(single, atom, n_atoms, d):
    left = scipy.sparse.identity(d ** atom, format="csr")
    right = scipy.sparse.identity(d ** (n_atoms - atom - 1), format="csr")
    return scipy.sparse.kron(scipy.sparse.kron(left, single, format="csr"), right, format="csr")


def estimate_nonzeros(h0, cos_u, n_atoms):
    d = h0.shape[0]
    per_atom = d ** (n_atoms - 1)
    trap_nnz = n_atoms * np.count_nonzero(h0) * per_atom * (n_atoms + 1)
    coupling_nnz = 2 * n_atoms * np.count_nonzero(cos_u) * per_atom
    return int(trap_nnz + coupling_nnz)


def assemble(params, basis, max_nonzeros=DEFAULT_MAX_NONZEROS):
    if basis.n_atoms != params.n_atoms:
        raise ValueError(f"basis built for {basis.n_atoms} atoms, params have {params.n_atoms}")
    n_atoms = params.n_atoms
    d = basis.per_atom_dim
    h0, cos_u = single_atom_operators(params, basis)
    expected = estimate_nonzeros(h0, cos_u, n_atoms)
    if expected > max_nonzeros:
        raise BudgetExceededError(
            f"operator for N={n_atoms} with {basis.backend} dimension {d} needs ~{expected:.2e} nonzeros, "
            f"budget is {max_nonzeros:.2e}; use the moments route for large N"
        )
    logger.info(f"Assembling {basis.backend} operator, dimension {basis.total_dim}, ~{expected} nonzeros")

    h0 = scipy.sparse.csr_matrix(h0)
    cos_u = scipy.sparse.csr_matrix(cos_u)
    trap = functools.reduce(
        lambda a, b: a + b,
        [_embed(h0, i, n_atoms, d) for i in range(n_atoms)]
    )
    matrix = scipy.sparse.kron(scipy.sparse.identity(n_atoms + 1, format="csr"), trap, format="csr")
    for i in range(n_atoms):
        hop = scipy.sparse.coo_matrix(
            ([1.0, 1.0], ([0, i + 1], [i + 1, 0])), shape=(n_atoms + 1, n_atoms + 1)
        )
        matrix = matrix + scipy.sparse.kron(hop, _embed(cos_u, i, n_atoms, d), format="csr")
    matrix = matrix.tocsr()
    assert matrix.shape == (basis.total_dim, basis.total_dim), f"{matrix.shape} vs {basis.total_dim}"
    return ManifoldOperator(matrix, basis, params, params.zero_point_energy)


def initial_state(params, basis):
    """a^dagger |Psi_0>: motional ground state of every atom with the photon in the cavity."""
    if basis.n_atoms != params.n_atoms:
        raise ValueError(f"basis built for {basis.n_atoms} atoms, params have {params.n_atoms}")
    vector = np.zeros(basis.total_dim)
    if basis.backend == FOCK_BACKEND:
        vector[0] = 1.0
        description = "fock |0...0> x internal |0>"
    else:
        # ground-state density has standard deviation eta in u
        u = basis.grid
        single = np.exp(-u * u / (4.0 * params.eta ** 2))
        single /= np.linalg.norm(single)
        motional = functools.reduce(np.kron, [single] * params.n_atoms)
        vector[:len(motional)] = motional
        description = "sampled gaussian ground state x internal |0>"
    return InitialState(vector, description)


# Binary operator dump, little-endian:
#   8 bytes   magic b"CTLYOP01"
#   uint64    dimension
#   uint64    number of stored entries
#   entries   (int64 row, int64 col, float64 value) triplets
_DUMP_MAGIC = b"CTLYOP01"
_DUMP_HEADER = np.dtype([("dim", "<u8"), ("nnz", "<u8")])
_DUMP_ENTRY = np.dtype([("row", "<i8"), ("col", "<i8"), ("value", "<f8")])


def dump_operator(op, path):
    coo = op.matrix.tocoo()
    header = np.array([(op.dim, coo.nnz)], dtype=_DUMP_HEADER)
    entries = np.empty(coo.nnz, dtype=_DUMP_ENTRY)
    entries["row"] = coo.row
    entries["col"] = coo.col
    entries["value"] = coo.data
    with open(path, "wb") as f:
        f.write(_DUMP_MAGIC)
        f.write(header.tobytes())
        f.write(entries.tobytes())


def load_operator_matrix(path):
    with open(path, "rb") as f:
        magic = f.read(len(_DUMP_MAGIC))
        if magic != _DUMP_MAGIC:
            raise ValueError(f"{path} is not an operator dump (magic {magic!r})")
        header = np.frombuffer(f.read(_DUMP_HEADER.itemsize), dtype=_DUMP_HEADER)[0]
        entries = np.frombuffer(f.read(), dtype=_DUMP_ENTRY)
    dim = int(header["dim"])
    assert len(entries) == int(header["nnz"]), f"{path}: truncated dump"
    return scipy.sparse.csr_matrix(
        (entries["value"], (entries["row"], entries["col"])), shape=(dim, dim)
    )
