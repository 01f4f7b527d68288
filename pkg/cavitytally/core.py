# -*- coding: utf-8 -*-
# python3
# core.py
# Shared record types and the error hierarchy used by every module
# of the package.

# Unit conventions used throughout the package:
# + hbar = 1, all frequencies and energies are in units of the single-atom
#   vacuum Rabi coupling g;
# + positions are scaled by the cavity wavenumber, u = k*x;
# + spectra are reported as detunings relative to the motional zero-point
#   energy E0, with the empty-cavity resonance (omega_c == omega_a) as the
#   frequency origin.

from collections import namedtuple

import numpy as np

# Bumped whenever a CSV header or JSON layout emitted by the package changes.
SCHEMA_VERSION = "1"

RED = "red"
BLUE = "blue"
SIDES = (RED, BLUE)


class CavityTallyError(RuntimeError):
    """Base class for failures of a computation."""


class ConfigError(CavityTallyError, ValueError):
    """A configuration key or command-line value is invalid."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class NodeSingularityError(CavityTallyError):
    """All atoms sit (numerically) at nodes of the cavity mode."""


class BudgetExceededError(CavityTallyError):
    pass


class GridBoxError(CavityTallyError):
    pass


class ConvergenceError(CavityTallyError):
    pass


class SamplingError(CavityTallyError):
    pass


class TruncationError(CavityTallyError):
    pass


def side_sign(side):
    """+1 for the blue sideband, -1 for the red one."""
    if side == BLUE:
        return 1
    elif side == RED:
        return -1
    raise ValueError(f"Unknown sideband {side!r}, expected one of {SIDES}")


# A stick spectrum holds two parallel arrays sorted by omega.
# origin is one of "exact_diag", "lanczos_seed", "tavis_cummings".
_StickSpectrumBase = namedtuple("StickSpectrum", "omega weight origin")


class StickSpectrum(_StickSpectrumBase):
    __slots__ = ()

    @property
    def lines(self):
        return list(zip(self.omega.tolist(), self.weight.tolist()))

    @property
    def total_weight(self):
        return float(np.sum(self.weight))

    @property
    def n_lines(self):
        return len(self.omega)


def make_stick_spectrum(omega, weight, origin):
    omega = np.asarray(omega, dtype=float)
    weight = np.asarray(weight, dtype=float)
    assert omega.shape == weight.shape, f"{omega.shape} != {weight.shape}"
    order = np.argsort(omega, kind="stable")
    return StickSpectrum(omega[order], weight[order], origin)


# method is one of "spectrum", "perturbative_mc", "series".
# For an empty sideband mean and variance are None and empty is True.
SidebandSummary = namedtuple("SidebandSummary", "side total_weight mean variance method empty")
