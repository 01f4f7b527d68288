# -*- coding: utf-8 -*-

from .context import cavitytally

import unittest
from unittest import mock

from cavitytally import hamiltonian as H
from cavitytally import validate as V

FAST_CHECKS = (
    "tavis_cummings_recovery", "sum_rules", "counting_endpoints", "figure3_bands",
    "figure4_n_max", "cos_element_quadrature", "geometry_completeness",
)


class ValidateTestSuite(unittest.TestCase):

    def test_fast_checks_pass(self):
        results = V.run_checks(names=FAST_CHECKS)
        self.assertEqual(list(FAST_CHECKS), [r.name for r in results])
        for r in results:
            self.assertTrue(r.passed, f"{r.name}: {r.detail}")

    def test_backend_and_cutoff_checks_pass(self):
        results = V.run_checks(names=("fock_vs_grid", "zeta_cutoff_sensitivity"))
        for r in results:
            self.assertTrue(r.passed, f"{r.name}: {r.detail}")
        self.assertIn("five heaviest lines", results[0].detail)
        self.assertIn("control N=2", results[1].detail)

    def test_checks_run_in_table_order(self):
        results = V.run_checks(names=("geometry_completeness", "counting_endpoints"))
        self.assertEqual(["counting_endpoints", "geometry_completeness"], [r.name for r in results])

    def test_report_format(self):
        results = [V.CheckResult("first", True, "fine"), V.CheckResult("second_check", False, "off by 2")]
        lines = V.format_report(results).splitlines()
        self.assertEqual("first         PASS  fine", lines[0])
        self.assertEqual("second_check  FAIL  off by 2", lines[1])
        self.assertEqual("1/2 checks passed", lines[-1])

    def test_corrupted_cosine_matrix_fails_sum_rules(self):
        original = H.cos_matrix_fock

        def corrupted(eta, dim):
            return 1.01 * original(eta, dim)

        with mock.patch("cavitytally.hamiltonian.cos_matrix_fock", corrupted):
            results = V.run_checks(names=("sum_rules",))
        self.assertFalse(results[0].passed)
        self.assertTrue(V.run_checks(names=("sum_rules",))[0].passed)


if __name__ == "__main__":
    unittest.main()
