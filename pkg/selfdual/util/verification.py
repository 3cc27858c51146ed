"""
Invariant battery behind the verify command

Every check records its measured value against a threshold; failures are also reported on standard
error with an [ERROR] prefix unless the run is quiet.
"""
import math
import sys

import numpy as np

from selfdual.selfdual import warn, RefinementWarning
from selfdual.constant import defaults
from selfdual.energetics import energy_internal, gl_residual, m_E_closed_form
from selfdual.errors import SelfDualError
from selfdual.landau.groundstate import (apply_L_plus, combine_sections, eval_u0, eval_u_h, lowest_landau_level,
                                         rayleigh_quotient)
from selfdual.landau.zeros import locate_zero
from selfdual.lattice.geometry import make_grid
from selfdual.lattice.spectral import ScalarField, band_limited_noise, skew_gradient
from selfdual.model import CheckResult
from selfdual.solver.bogomolny import bogomolny_residuals, build_pair, self_dual_mu
from selfdual.solver.kazdan_warner import solve_kazdan_warner

__all__ = ['VerificationRun', 'random_pair', 'verify', 'IDENTITY_FIELDS']

# Fields at which the self-dual identities are checked
IDENTITY_FIELDS = (0.2, 0.3, 0.5, 0.65)
UNIQUENESS_FIELD = 0.3
UNIQUENESS_STARTS = 5


def random_pair(lat, grid, theta, rng):
    """
    Admissible pair far from any minimizer: u = alpha u0 + beta u_h, a the skew gradient of band-limited
    noise scaled to max |a| = 1

    :param rng: numpy Generator
    """
    alpha, beta = rng.uniform(-1.0, 1.0, size=2)
    h = lat.to_cartesian(*rng.uniform(0.0, 1.0, size=2))
    u = combine_sections([alpha, beta], [eval_u0(lat, grid, theta), eval_u_h(lat, grid, theta, h)])
    a = skew_gradient(band_limited_noise(grid, defaults.RANDOM_MODES, rng))
    return u, a * (1.0 / max(a.max_norm(), 1e-300))


class VerificationRun(object):
    """Collects checks; passed is False as soon as one check fails"""

    def __init__(self, quiet=False):
        self.checks = []
        self.warnings = []
        self.quiet = quiet

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def expect_below(self, name, value, threshold):
        value = float(value)
        check = CheckResult(name, bool(math.isfinite(value) and value < threshold), value, threshold)
        self.checks.append(check)
        if not check.passed:
            self._error('{} = {:.3e}, expected below {:.1e}'.format(name, value, threshold))
        return check

    def expect_close(self, name, value, expected, threshold, relative=False):
        scale = abs(expected) if relative and expected != 0 else 1.0
        return self.expect_below(name, abs(value - expected) / scale, threshold)

    def fail(self, name, error):
        self.checks.append(CheckResult(name, False, None, None))
        self._error('{}: {}'.format(name, error))

    def note(self, message, category=RefinementWarning):
        self.warnings.append(message)
        warn(message, category)

    def report(self):
        return {
            'passed': self.passed,
            'checks': [dict(check._asdict()) for check in self.checks],
            'warnings': list(self.warnings),
        }

    def _error(self, message):
        if not self.quiet:
            sys.stderr.write('[ERROR] ' + message + '\n')


def _ground_state_checks(run, lat, grid, theta):
    u0 = eval_u0(lat, grid, theta)
    run.expect_below('ground_state.L_plus', np.max(np.abs(apply_L_plus(u0))), 1e-10)
    run.expect_close('ground_state.norm', u0.norm_squared(), lat.u / defaults.SQRT2, 1e-10)
    run.expect_close('ground_state.rayleigh', rayleigh_quotient(u0), lowest_landau_level, 1e-8)
    try:
        zero = locate_zero(u0)
    except SelfDualError as e:
        run.fail('ground_state.winding', e)
        return
    run.expect_close('ground_state.winding', zero.winding, 1, 0.5)
    if lat.u == 1.0 and lat.w == 0.0:
        run.expect_below('ground_state.zero_location', math.hypot(zero.point[0] - 0.5, zero.point[1] - 0.5),
                         2.0 / grid.n)


def _pair_checks(run, lat, grid, theta, cfg, H, inject_fault):
    prefix = 'pair[{:g}].'.format(H)
    try:
        pair = build_pair(lat, grid, theta, H, cfg)
    except SelfDualError as e:
        run.fail(prefix + 'solve', e)
        return
    u, a = pair.u, pair.a
    if inject_fault:
        u = combine_sections([defaults.FAULT_SCALE], [u])
    k = defaults.SELF_DUAL_K
    mu = self_dual_mu(H)
    mu_pi = mu * math.pi
    report = energy_internal(u, a, k, H)
    norm = float(np.mean(u.modulus_squared()))
    run.expect_below(prefix + 'bkn_defect', report.bkn_defect, defaults.INTEGRITY_TOL)
    run.expect_close(prefix + 'norm_u2', norm, 1.0 - defaults.SQRT2 * H, defaults.IDENTITY_TOL)
    run.expect_close(prefix + 'potential_identity', 4.0 * report.potential,
                     mu * mu * (4.0 * math.pi ** 2 + pair.curl_energy), defaults.IDENTITY_TOL, relative=True)
    run.expect_close(prefix + 'kinetic_identity', report.kinetic + 2.0 * report.field,
                     mu_pi - 2.0 * mu_pi * mu_pi, defaults.IDENTITY_TOL, relative=True)
    run.expect_close(prefix + 'internal_energy', report.internal, m_E_closed_form(H), defaults.IDENTITY_TOL)
    d_plus, field_equation = bogomolny_residuals(u, a, mu)
    run.expect_below(prefix + 'bogomolny.d_plus', d_plus, defaults.IDENTITY_TOL)
    run.expect_below(prefix + 'bogomolny.field', field_equation, defaults.IDENTITY_TOL)
    first, second = gl_residual(u, a, k, H)
    run.expect_below(prefix + 'gl.order_parameter', first, defaults.IDENTITY_TOL)
    run.expect_below(prefix + 'gl.potential', second, defaults.IDENTITY_TOL)


def _random_checks(run, lat, grid, theta, rng, count):
    worst = worst_general = 0.0
    lowest_normal = math.inf
    for _ in range(count):
        u, a = random_pair(lat, grid, theta, rng)
        H = rng.uniform(0.05, 1.0)
        worst = max(worst, energy_internal(u, a, defaults.SELF_DUAL_K, H).bkn_defect)
        k = rng.uniform(defaults.SELF_DUAL_K, 2.0)
        worst_general = max(worst_general, energy_internal(u, a, k, H).bkn_defect)
        lowest_normal = min(lowest_normal, energy_internal(u, a, k, k + rng.uniform(0.0, 1.0)).internal)
    run.expect_below('random.bkn_defect', worst, defaults.INTEGRITY_TOL)
    run.expect_below('random.bkn_defect_any_k', worst_general, defaults.INTEGRITY_TOL)
    run.expect_below('random.normal_state_deficit', max(0.0, 0.25 - lowest_normal), 1e-9)


def _uniqueness_checks(run, lat, grid, theta, cfg, rng):
    H = UNIQUENESS_FIELD
    try:
        reference = build_pair(lat, grid, theta, H, cfg).f
        h = ScalarField(grid, eval_u0(lat, grid, theta).modulus_squared())
        A = 1.0 - defaults.SQRT2 * H
        spread = 0.0
        for _ in range(UNIQUENESS_STARTS):
            start = 0.5 * math.log(A) + 0.1 * rng.standard_normal(grid.shape)
            f = solve_kazdan_warner(h, A, self_dual_mu(H), cfg, init=ScalarField(grid, start))
            spread = max(spread, float(np.max(np.abs(f.values - reference.values))))
    except SelfDualError as e:
        run.fail('uniqueness', e)
        return
    run.expect_below('uniqueness', spread, 1e-8)


def _refinement_checks(run, lat, grid, theta, cfg, fields):
    fine_grid = make_grid(lat, 2 * grid.n)
    # the smallest fields carry the sharpest cores
    for H in sorted({defaults.H_MIN, min(fields)}):
        try:
            coarse = build_pair(lat, grid, theta, H, cfg)
            fine = build_pair(lat, fine_grid, theta, H, cfg)
        except SelfDualError as e:
            run.note('refinement check at H_int={} skipped: {}'.format(H, e))
            continue
        drift = max(abs(getattr(coarse, name) - getattr(fine, name))
                    for name in ('norm_u2', 'potential_integral', 'curl_energy', 'kinetic_integral'))
        if drift > defaults.REFINEMENT_DRIFT:
            run.note('cached integrals at H_int={} drift by {:.3e} between n={} and n={}'.format(
                H, drift, grid.n, 2 * grid.n))


def verify(lat, cfg, seed=0, inject_fault=False, random_pairs=defaults.RANDOM_PAIRS, fields=IDENTITY_FIELDS,
           quiet=False):
    """
    Run the whole battery on one lattice

    :param inject_fault: scale every solved u by FAULT_SCALE before checking it; the energy splitting still
                         holds for the scaled pair while the solution identities fail
    :return: VerificationRun
    """
    run = VerificationRun(quiet)
    rng = np.random.default_rng(seed)
    grid = make_grid(lat, cfg.grid_n)
    theta = cfg.theta
    _ground_state_checks(run, lat, grid, theta)
    for H in fields:
        _pair_checks(run, lat, grid, theta, cfg, H, inject_fault)
    _random_checks(run, lat, grid, theta, rng, random_pairs)
    _uniqueness_checks(run, lat, grid, theta, cfg, rng)
    _refinement_checks(run, lat, grid, theta, cfg, fields)
    return run
