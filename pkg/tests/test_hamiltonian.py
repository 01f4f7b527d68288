# -*- coding: utf-8 -*-

from .context import cavitytally

import math
import os
import tempfile
import unittest

import numpy as np
import scipy.linalg

from cavitytally import hamiltonian as H
from cavitytally import params as P
from cavitytally.core import BudgetExceededError, ConfigError, GridBoxError, TruncationError


def _params(**raw):
    return P.from_config(raw)


class CosMatrixTestSuite(unittest.TestCase):

    def test_ground_state_element(self):
        for eta in (0.1, 0.5, 1.0):
            self.assertAlmostEqual(math.exp(-eta ** 2 / 2.0), H.cos_matrix_fock(eta, 4)[0, 0], places=14)

    def test_symmetric_with_zero_odd_couplings(self):
        c = H.cos_matrix_fock(0.7, 20)
        np.testing.assert_array_equal(c, c.T)
        m, n = np.indices(c.shape)
        np.testing.assert_array_equal(0.0, c[(m - n) % 2 == 1])

    def test_matches_matrix_cosine(self):
        eta, big = 0.7, 120
        a = np.diag(np.sqrt(np.arange(1, big)), 1)
        reference = scipy.linalg.cosm(eta * (a + a.T))
        np.testing.assert_allclose(reference[:12, :12], H.cos_matrix_fock(eta, 12), atol=1e-10)

    def test_ground_column_sum_rule(self):
        eta = 0.5
        column = H.cos_matrix_fock(eta, 40)[:, 0]
        self.assertAlmostEqual(0.5 * (1.0 + math.exp(-2.0 * eta ** 2)), float(column @ column), places=14)

    def test_rejects_bad_arguments(self):
        with self.assertRaises(ValueError):
            H.cos_matrix_fock(0.0, 10)
        with self.assertRaises(ValueError):
            H.cos_matrix_fock(0.5, 1)
        with self.assertRaises(TruncationError):
            H.cos_matrix_fock(0.5, H.MAX_FOCK_DIM + 1)

    def test_suggested_dimension_is_smallest_sufficient(self):
        eta = 0.8
        d = H.suggest_fock_dim(eta)
        self.assertLess(H.fock_truncation_deficit(eta, d), H.TRUNCATION_TOLERANCE)
        self.assertGreaterEqual(H.fock_truncation_deficit(eta, d - 1), H.TRUNCATION_TOLERANCE)


class BasisTestSuite(unittest.TestCase):

    def test_fock_dimensions(self):
        basis = H.make_basis(_params(n_atoms=1, eta=0.5, recoil_ratio=0.05, n_max_fock=40))
        self.assertEqual(80, basis.total_dim)
        basis = H.make_basis(_params(n_atoms=2, eta=0.5, recoil_ratio=0.05, n_max_fock=10))
        self.assertEqual(300, basis.total_dim)

    def test_tight_limit_has_no_basis(self):
        with self.assertRaises(ConfigError):
            H.make_basis(_params(n_atoms=1, epsilon=1.0, recoil_ratio=0.01))

    def test_unknown_backend(self):
        with self.assertRaises(ConfigError) as cm:
            H.make_basis(_params(n_atoms=1, eta=0.5, recoil_ratio=0.01), "plane_waves")
        self.assertEqual("backend", cm.exception.key)
        self.assertEqual(("fock", "grid"), H.BACKENDS)

    def test_short_fock_basis_is_refused(self):
        eta = 0.8
        with self.assertRaises(TruncationError) as cm:
            H.make_basis(_params(n_atoms=1, eta=eta, recoil_ratio=0.01, n_max_fock=4))
        self.assertIn(f"n_max_fock={H.suggest_fock_dim(eta)}", str(cm.exception))
        basis = H.make_basis(_params(n_atoms=1, eta=eta, recoil_ratio=0.01, n_max_fock=H.suggest_fock_dim(eta)))
        self.assertEqual(H.suggest_fock_dim(eta), basis.per_atom_dim)

    def test_grid_box_checks(self):
        with self.assertRaises(GridBoxError):
            H.make_basis(_params(n_atoms=1, eta=0.5, recoil_ratio=0.01, grid_halfwidth=1.0), "grid")
        with self.assertRaises(GridBoxError):
            H.make_basis(_params(n_atoms=1, eta=0.5, recoil_ratio=0.01, grid_points=8), "grid")

    def test_dvr_reproduces_trap_levels(self):
        p = _params(n_atoms=1, eta=0.5, recoil_ratio=0.05, grid_points=128)
        basis = H.make_basis(p, "grid")
        h0, cos_u = H.single_atom_operators(p, basis)
        levels = np.linalg.eigvalsh(h0)[:3]
        np.testing.assert_allclose(p.trap_frequency * np.array([0.5, 1.5, 2.5]), levels, atol=1e-6)
        np.testing.assert_array_equal(np.diag(np.cos(basis.grid)), cos_u)


class AssemblyTestSuite(unittest.TestCase):

    def setUp(self):
        self.p = _params(n_atoms=2, epsilon=0.5, recoil_ratio=0.01, n_max_fock=8)
        self.basis = H.make_basis(self.p)
        self.op = H.assemble(self.p, self.basis)

    def test_operator_is_exactly_symmetric(self):
        self.assertEqual((192, 192), self.op.matrix.shape)
        self.assertEqual(0.0, abs(self.op.matrix - self.op.matrix.T).max())

    def test_initial_state_energy_is_zero_point(self):
        psi = H.initial_state(self.p, self.basis).vector
        self.assertEqual(1.0, np.linalg.norm(psi))
        self.assertAlmostEqual(self.p.zero_point_energy, psi @ (self.op.matrix @ psi), places=12)

    def test_photon_couples_to_each_atom(self):
        psi = H.initial_state(self.p, self.basis).vector
        coupled = self.op.matrix @ psi
        block = self.basis.total_dim // (self.p.n_atoms + 1)
        for atom in (1, 2):
            self.assertGreater(np.linalg.norm(coupled[atom * block:(atom + 1) * block]), 0.5)

    def test_budget(self):
        with self.assertRaises(BudgetExceededError) as cm:
            H.assemble(self.p, self.basis, max_nonzeros=10)
        self.assertIn("moments", str(cm.exception))

    def test_grid_initial_state_is_normalized_product(self):
        p = _params(n_atoms=2, eta=0.5, recoil_ratio=0.05, grid_points=32, grid_halfwidth=4.0)
        basis = H.make_basis(p, "grid")
        psi = H.initial_state(p, basis).vector
        self.assertAlmostEqual(1.0, np.linalg.norm(psi), places=14)
        self.assertEqual(0.0, np.linalg.norm(psi[32 * 32:]))

    def test_grid_initial_state_width(self):
        p = _params(n_atoms=1, eta=0.5, recoil_ratio=0.05, grid_points=256)
        basis = H.make_basis(p, "grid")
        psi = H.initial_state(p, basis).vector[:256]
        self.assertAlmostEqual(p.eta ** 2, float(np.sum(psi * psi * basis.grid ** 2)), delta=1e-6)

    def test_dump_and_load(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "operator.bin")
            H.dump_operator(self.op, path)
            loaded = H.load_operator_matrix(path)
            self.assertEqual(0.0, abs(loaded - self.op.matrix).max())
            with open(path, "r+b") as f:
                f.write(b"NOTADUMP")
            with self.assertRaises(ValueError):
                H.load_operator_matrix(path)


if __name__ == "__main__":
    unittest.main()
