# -*- coding: utf-8 -*-

from .context import cavitytally

import math
import unittest

import numpy as np

from cavitytally import counting as C
from cavitytally import params as P
from cavitytally.core import ConfigError


def _params(**raw):
    return P.from_config(raw)


class SeparationTestSuite(unittest.TestCase):

    def test_tight_trap_single_atom(self):
        gap = C.separation(1, _params(n_atoms=1, epsilon=1.0, recoil_ratio=0.01))
        self.assertAlmostEqual(math.sqrt(2.0) - 1.0, gap.exact, places=14)
        self.assertAlmostEqual(0.5, gap.asymptotic, places=15)

    def test_asymptotic_example(self):
        gap = C.separation(8, _params(n_atoms=8, epsilon=0.5, recoil_ratio=0.01))
        self.assertAlmostEqual(0.15309, gap.asymptotic, places=5)
        self.assertLess(abs(gap.exact - gap.asymptotic), 0.01)

    def test_decreases_with_atom_number(self):
        p = _params(n_atoms=1, epsilon=0.7, recoil_ratio=0.01)
        gaps = [C.separation(n, p).exact for n in range(1, 30)]
        self.assertTrue(np.all(np.diff(gaps) < 0))

    def test_needs_an_atom(self):
        with self.assertRaises(ConfigError):
            C.separation(0, _params(n_atoms=1, epsilon=0.7, recoil_ratio=0.01))


class NMaxTestSuite(unittest.TestCase):

    def test_endpoints(self):
        self.assertAlmostEqual(25.0, C.n_max(1.0, 0.1).value, places=10)
        self.assertAlmostEqual(1.0 / 0.58, C.n_max(0.0, 0.1).value, places=12)
        self.assertAlmostEqual(2.0, C.n_max(0.0, 0.0).value, places=15)
        unbounded = C.n_max(1.0, 0.0)
        self.assertTrue(unbounded.unbounded)
        self.assertTrue(math.isinf(unbounded.value))
        self.assertEqual("unbounded", unbounded.regime)

    def test_regimes(self):
        self.assertEqual("extrinsic", C.n_max(0.5, 0.2).regime)
        self.assertEqual("intrinsic", C.n_max(0.5, 0.1).regime)
        self.assertEqual("balanced", C.n_max(0.5, 0.125).regime)

    def test_rejects_out_of_range(self):
        with self.assertRaises(ConfigError):
            C.n_max(0.5, -0.1)
        with self.assertRaises(ConfigError):
            C.n_max(1.5, 0.1)


class CountingReportTestSuite(unittest.TestCase):

    def test_report_invariants(self):
        p = _params(n_atoms=8, epsilon=0.6, recoil_ratio=0.01, kappa_ext=0.05)
        report = C.counting_report(8, p)
        self.assertEqual("series", report.method)
        self.assertEqual(0.05, report.extrinsic_width)
        self.assertAlmostEqual(math.hypot(report.intrinsic_width, report.extrinsic_width), report.combined_width, places=15)
        self.assertGreaterEqual(report.combined_width, max(report.intrinsic_width, report.extrinsic_width))
        self.assertEqual(report.separation > report.combined_width, report.distinguishable)

    def test_verdicts(self):
        self.assertTrue(C.counting_report(8, _params(n_atoms=8, epsilon=0.95, recoil_ratio=0.01)).distinguishable)
        self.assertFalse(C.counting_report(8, _params(n_atoms=8, epsilon=0.2, recoil_ratio=0.01)).distinguishable)

    def test_extrinsic_width_can_spoil_a_verdict(self):
        p = _params(n_atoms=8, epsilon=0.95, recoil_ratio=0.01)
        self.assertFalse(C.counting_report(8, P.replace(p, kappa_ext=0.5)).distinguishable)

    def test_width_multiplier_scales_intrinsic_width(self):
        p = _params(n_atoms=8, epsilon=0.5, recoil_ratio=0.01)
        once = C.counting_report(8, p)
        twice = C.counting_report(8, p, width_multiplier=2.0)
        self.assertAlmostEqual(2.0 * once.intrinsic_width, twice.intrinsic_width, places=15)

    def test_spectrum_route_agrees_with_series(self):
        p = _params(n_atoms=1, eta=0.01, recoil_ratio=0.01, n_max_fock=4)
        series = C.counting_report(1, p)
        spectrum = C.counting_report(1, p, method="spectrum")
        self.assertEqual(series.distinguishable, spectrum.distinguishable)
        self.assertAlmostEqual(series.separation, spectrum.separation, delta=1e-3)

    def test_unknown_method(self):
        with self.assertRaises(ConfigError):
            C.counting_report(8, _params(n_atoms=8, epsilon=0.5, recoil_ratio=0.01), method="guess")


class SweepTestSuite(unittest.TestCase):

    def test_figure3_bands(self):
        table = C.figure3_sweep(_params(n_atoms=8, epsilon=0.5, recoil_ratio=0.01))
        self.assertEqual(100, len(table.rows))
        self.assertEqual((8, 9), table.n_pair)
        self.assertTrue(table.rows[0].overlap)
        self.assertFalse(table.rows[-1].overlap)
        self.assertGreater(table.crossover, 0.3)
        self.assertLess(table.crossover, 0.8)

    def test_figure3_needs_ordered_pair(self):
        with self.assertRaises(ConfigError):
            C.figure3_sweep(_params(n_atoms=8, epsilon=0.5, recoil_ratio=0.01), (9, 8))

    def test_figure4_intrinsic_only_column(self):
        table = C.figure4_sweep((0.0, 0.1))
        column = table.columns[C.kappa_column_name(0.0)]
        finite = table.epsilon < 1.0
        np.testing.assert_allclose(2.0 / (1.0 - table.epsilon[finite]) ** 2, column[finite], rtol=1e-12)
        self.assertTrue(math.isinf(column[-1]))
        self.assertEqual({"n_max_kappa_0": True, "n_max_kappa_0.1": True}, table.monotonic)

    def test_figure4_loose_trap_row(self):
        for kappa in (0.05, 0.1, 0.2):
            self.assertAlmostEqual(1.0 / (0.5 + 8.0 * kappa ** 2), C.n_max(0.0, kappa).value, places=12)


if __name__ == "__main__":
    unittest.main()
