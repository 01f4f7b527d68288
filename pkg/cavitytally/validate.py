# python3
# validate.py
# Self-checks of the package: sum rules, limit recoveries, cross-checks
# between independent routes to the same quantity.

# Each check is a function taking a ValidationContext and returning
# (passed, detail).  Checks are listed in _CHECKS in the order they are
# run and reported.  A check which raises CavityTallyError fails with the
# error message as its detail; any other exception is a bug and propagates.

from collections import namedtuple
import logging
import math

import numpy as np

from . import params as P
from .core import BLUE, RED, CavityTallyError
from .counting import figure3_sweep, figure4_sweep, kappa_column_name, n_max
from .geometry import bright_pair, chi, dark_basis, optical_potential
from .hamiltonian import assemble, cos_matrix_fock, initial_state, make_basis, suggest_fock_dim
from .helpers import relative_error
from .moments import (
    adjudicate_loose_variance, cutoff_sensitivity, gaussian_cos_moments, gaussian_expectation,
    mc_moments, perturbative_sideband, series_sideband,
)
from .spectra import lanczos_spectrum, projection_diagnostics, spectral_moments, split_sidebands, stick_spectrum

logger = logging.getLogger(__name__)

# chi^2 cutoff of the loose-trap run that must respond to halving the cutoff
CONTROL_CUTOFF = 0.02

ValidationContext = namedtuple("ValidationContext", "seed workers")

CheckResult = namedtuple("CheckResult", "name passed detail")

Check = namedtuple("Check", "name function")


def _params(**raw):
    return P.from_config(raw)


def _fock_run(p):
    basis = make_basis(p, "fock")
    op = assemble(p, basis)
    return op, initial_state(p, basis)


def _dominant_line(sticks, side):
    mask = sticks.omega < 0 if side == RED else sticks.omega > 0
    if not np.any(mask):
        return None, 0.0
    k = int(np.argmax(np.where(mask, sticks.weight, -1.0)))
    return float(sticks.omega[k]), float(sticks.weight[k])


def _line(omega, weight):
    return "none" if omega is None else f"{omega:+.4f}(w={weight:.4f})"


def check_tavis_cummings_recovery(context):
    details = []
    passed = True
    for n in (1, 2, 3):
        p = _params(n_atoms=n, eta=0.01, recoil_ratio=0.01, n_max_fock=4)
        op, psi = _fock_run(p)
        sticks = stick_spectrum(op, psi)
        red_omega, red_weight = _dominant_line(sticks, RED)
        blue_omega, blue_weight = _dominant_line(sticks, BLUE)
        split = math.sqrt(n)
        ok = (
            red_omega is not None and blue_omega is not None
            and abs(red_omega + split) < 1e-2 and abs(blue_omega - split) < 1e-2
            and red_weight + blue_weight > 0.99
            and abs(red_weight - 0.5) < 0.01 and abs(blue_weight - 0.5) < 0.01
        )
        passed &= ok
        details.append(f"N={n}: {_line(red_omega, red_weight)} {_line(blue_omega, blue_weight)}")
    return passed, "; ".join(details)


def check_sum_rules(context):
    worst = [0.0, 0.0, 0.0]
    for n in (1, 2):
        for eps in (0.2, 0.5, 0.9):
            eta = P.eta_from_epsilon(eps)
            p = _params(n_atoms=n, epsilon=eps, recoil_ratio=0.01, n_max_fock=suggest_fock_dim(eta))
            op, psi = _fock_run(p)
            everything = spectral_moments(stick_spectrum(op, psi), 2)["all"]
            oracle = gaussian_cos_moments(p).mean_chi2
            worst[0] = max(worst[0], abs(everything.total_weight - 1.0))
            worst[1] = max(worst[1], abs(everything.raw[1]))
            worst[2] = max(worst[2], relative_error(everything.central[2], oracle))
    passed = worst[0] < 1e-9 and worst[1] < 1e-8 and worst[2] < 1e-6
    return passed, f"max |weight-1|={worst[0]:.1e}, max |mean-E0|={worst[1]:.1e}, max rel var err={worst[2]:.1e}"


def check_series_vs_monte_carlo(context):
    details = []
    passed = True
    for eps in (0.3, 0.5, 0.8):
        p = _params(n_atoms=100, epsilon=eps, recoil_ratio=0.0)
        est = mc_moments(p, 1_000_000, context.seed, workers=context.workers)
        sampled = perturbative_sideband(est, p, BLUE).mean
        series = series_sideband(p, BLUE).mean
        err = relative_error(sampled, series)
        passed &= err < 5e-3
        details.append(f"eps={eps}: {err:.1e}")
    return passed, "relative mean error " + ", ".join(details)


def check_exact_vs_perturbative(context):
    p = _params(n_atoms=2, epsilon=0.5, recoil_ratio=0.01, n_max_fock=30)
    op, psi = _fock_run(p)
    red, _ = split_sidebands(stick_spectrum(op, psi))
    est = mc_moments(p, 200_000, context.seed, workers=context.workers)
    predicted = perturbative_sideband(est, p, RED).mean
    diff = abs(red.mean - predicted)
    return diff < 0.05, f"spectrum {red.mean:.4f} vs perturbative {predicted:.4f} (|diff|={diff:.4f})"


def check_loose_variance_adjudication(context):
    p = _params(n_atoms=200, epsilon=0.05, recoil_ratio=0.0)
    verdict = adjudicate_loose_variance(p, 200_000, context.seed, workers=context.workers)
    detail = (
        f"Var(chi)={verdict.mc_variance:.5f}: 1/16 series {verdict.series_value:.5f} "
        f"({verdict.series_error:.1%}), 1/8 loose {verdict.loose_value:.5f} ({verdict.loose_error:.1%}); "
        f"supported: {verdict.winner}"
    )
    return verdict.winner is not None, detail


def check_counting_endpoints(context):
    tight = n_max(1.0 - 1e-9, 0.1).value
    loose = n_max(1e-9, 0.1).value
    unbounded = n_max(1.0, 0.0)
    passed = (
        relative_error(tight, 25.0) < 1e-3
        and relative_error(loose, 1.0 / 0.58) < 1e-3
        and unbounded.unbounded and math.isinf(unbounded.value)
    )
    return passed, f"tight {tight:.4f}, loose {loose:.4f}, kappa=0/eps=1 unbounded={unbounded.unbounded}"


def check_figure3(context):
    table = figure3_sweep(_params(n_atoms=8, epsilon=0.5, recoil_ratio=0.01))
    separated = all(not row.overlap for row in table.rows if row.epsilon >= 0.95)
    overlapping = all(row.overlap for row in table.rows if row.epsilon <= 0.2)
    passed = separated and overlapping and table.crossover is not None
    crossover = "none" if table.crossover is None else f"{table.crossover:.4f}"
    return passed, f"N=(8,9) separated for eps>=0.95: {separated}, overlap for eps<=0.2: {overlapping}, crossover eps*={crossover}"


def check_figure4(context):
    kappas = (0.0, 0.05, 0.1, 0.2)
    table = figure4_sweep(kappas)
    below_one = table.epsilon < 1.0
    intrinsic_only = table.columns[kappa_column_name(0.0)][below_one]
    expected = 2.0 / (1.0 - table.epsilon[below_one]) ** 2
    worst = float(np.max(np.abs(intrinsic_only - expected) / expected))
    monotonic = all(table.monotonic.values())
    return worst < 1e-12 and monotonic, f"kappa=0 column max rel err {worst:.1e}, all monotonic: {monotonic}"


def check_fock_vs_grid(context):
    p = _params(n_atoms=1, eta=0.5, recoil_ratio=0.05, n_max_fock=80, grid_points=256)
    sticks = {}
    for backend in ("fock", "grid"):
        basis = make_basis(p, backend)
        sticks[backend] = stick_spectrum(assemble(p, basis), initial_state(p, basis))
    worst = 0.0
    for fock_side, grid_side in zip(split_sidebands(sticks["fock"]), split_sidebands(sticks["grid"])):
        worst = max(worst, abs(fock_side.mean - grid_side.mean), abs(fock_side.variance - grid_side.variance))
    worst_line = 0.0
    for k in np.argsort(sticks["fock"].weight)[::-1][:5]:
        nearest = int(np.argmin(np.abs(sticks["grid"].omega - sticks["fock"].omega[k])))
        worst_line = max(
            worst_line,
            abs(sticks["fock"].omega[k] - sticks["grid"].omega[nearest]),
            abs(sticks["fock"].weight[k] - sticks["grid"].weight[nearest]),
        )
    return worst < 2e-3 and worst_line < 1e-4, (
        f"max sideband mean/variance difference {worst:.1e}; "
        f"five heaviest lines agree to {worst_line:.1e}"
    )


def check_lanczos_vs_dense(context):
    p = _params(n_atoms=1, epsilon=0.5, recoil_ratio=0.01, n_max_fock=40)
    op, psi = _fock_run(p)
    dense = stick_spectrum(op, psi)
    ritz = lanczos_spectrum(op, psi, op.dim)
    heavy_dense = dense.omega[dense.weight > 1e-8]
    distance = np.abs(heavy_dense[:, np.newaxis] - ritz.omega[np.newaxis, :]).min(axis=1)
    same_lines = bool(np.all(distance < 1e-8))
    dense_moments = spectral_moments(dense, 4)["all"].central
    ritz_moments = spectral_moments(ritz, 4)["all"].central
    moment_err = max(abs(a - b) for a, b in zip(dense_moments, ritz_moments))
    two_step = spectral_moments(lanczos_spectrum(op, psi, 2), 2)["all"].central[2]
    column = cos_matrix_fock(p.eta, p.n_max_fock)[:, 0]
    truncated = p.n_atoms * float(np.dot(column, column))
    two_step_err = abs(two_step - truncated)
    passed = same_lines and moment_err < 1e-8 and two_step_err < 1e-8
    return passed, f"{len(heavy_dense)} lines matched: {same_lines}, moment err {moment_err:.1e}, 2-step variance err {two_step_err:.1e}"


def check_cos_element_quadrature(context):
    worst = 0.0
    for eta in (0.1, 0.5, 1.0):
        worst = max(worst, abs(cos_matrix_fock(eta, 2)[0, 0] - gaussian_expectation(math.cos, eta)))
    return worst < 1e-10, f"max |<0|cos u|0> - quadrature| = {worst:.1e}"


def check_cutoff_sensitivity(context):
    asserted = cutoff_sensitivity(_params(n_atoms=3, epsilon=0.5, recoil_ratio=0.0), 200_000, context.seed, workers=context.workers)
    # loose trap, wide cutoff: enough clipped samples that halving the cutoff must show
    control = cutoff_sensitivity(
        _params(n_atoms=2, epsilon=0.05, recoil_ratio=0.0), 200_000, context.seed,
        cutoff=CONTROL_CUTOFF, workers=context.workers,
    )
    reported = cutoff_sensitivity(_params(n_atoms=2, epsilon=0.5, recoil_ratio=0.0), 200_000, context.seed, workers=context.workers)
    passed = not asserted.sensitive and control.n_clipped > 0 and control.sensitive
    return passed, (
        f"N=3 shift {asserted.shift:.1e} (err {asserted.std_error:.1e}, {asserted.n_clipped} clipped); "
        f"control N=2 eps=0.05 cutoff {CONTROL_CUTOFF:g} shift {control.shift:.1e} "
        f"(err {control.std_error:.1e}, {control.n_clipped} clipped); "
        f"N=2 shift {reported.shift:.1e} (err {reported.std_error:.1e}, reported only)"
    )


def check_geometry_completeness(context):
    rng = np.random.default_rng(context.seed)
    worst = 0.0
    for n in (1, 2, 5):
        u = rng.normal(0.0, 0.6, size=n)
        v = optical_potential(u)
        pair = bright_pair(u)
        dark = dark_basis(u)
        projector = np.outer(pair.plus_vector, pair.plus_vector) + np.outer(pair.minus_vector, pair.minus_vector) + dark @ dark.T
        worst = max(
            worst,
            abs(pair.chi - chi(u)),
            float(np.max(np.abs(v @ pair.plus_vector - pair.chi * pair.plus_vector))),
            float(np.max(np.abs(v @ pair.minus_vector + pair.chi * pair.minus_vector))),
            float(np.max(np.abs(v @ dark), initial=0.0)),
            float(np.max(np.abs(projector - np.identity(n + 1)))),
        )
    return worst < 1e-12, f"max deviation {worst:.1e}"


def check_projection_agreement(context):
    p = _params(n_atoms=1, eta=0.3, recoil_ratio=0.01, grid_points=128)
    basis = make_basis(p, "grid")
    diagnostics = projection_diagnostics(assemble(p, basis), initial_state(p, basis))
    return diagnostics.agreement > 0.95, f"frequency-sign vs Pi+/- agreement {diagnostics.agreement:.4f}"


_CHECKS = (
    Check("tavis_cummings_recovery", check_tavis_cummings_recovery),
    Check("sum_rules", check_sum_rules),
    Check("series_vs_monte_carlo", check_series_vs_monte_carlo),
    Check("exact_vs_perturbative", check_exact_vs_perturbative),
    Check("loose_variance_adjudication", check_loose_variance_adjudication),
    Check("counting_endpoints", check_counting_endpoints),
    Check("figure3_bands", check_figure3),
    Check("figure4_n_max", check_figure4),
    Check("fock_vs_grid", check_fock_vs_grid),
    Check("lanczos_vs_dense", check_lanczos_vs_dense),
    Check("cos_element_quadrature", check_cos_element_quadrature),
    Check("zeta_cutoff_sensitivity", check_cutoff_sensitivity),
    Check("geometry_completeness", check_geometry_completeness),
    Check("projection_agreement", check_projection_agreement),
)

CHECK_NAMES = tuple(c.name for c in _CHECKS)


def run_checks(seed=0, workers=None, names=None):
    context = ValidationContext(seed, workers)
    results = []
    for check in _CHECKS:
        if names is not None and check.name not in names:
            continue
        logger.info(f"Running check {check.name}")
        try:
            passed, detail = check.function(context)
        except CavityTallyError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        results.append(CheckResult(check.name, bool(passed), detail))
    return results


def format_report(results):
    width = max((len(r.name) for r in results), default=0)
    lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
