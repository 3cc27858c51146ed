"""
Self-dual minimizing pairs (u_H, a_H) assembled from the Kazdan-Warner solution f_H

    u = u0 * exp(f),  a = (df/dy, -df/dx),  curl a = -lap f,  mu = H / (pi * sqrt(2))
where f solves mu * lap f = |u0|^2 exp(2f) - (1 - sqrt(2) H).
"""
from dataclasses import dataclass
import logging
import math
from typing import Optional

import numpy as np

from selfdual.selfdual import cached
from selfdual.constant import defaults
from selfdual.constant.flag import SectionSource
from selfdual.errors import ContractError, DomainError, IntegrityError, SelfDualError, SolverError
from selfdual.landau.groundstate import SectionField, ThetaParams, eval_u0
from selfdual.lattice.geometry import Grid, Lattice, make_grid
from selfdual.lattice.spectral import ScalarField, VectorField, curl, gradient, laplacian, resample, skew_gradient
from selfdual.model import SolveDiagnostics, SweepResult
from selfdual.solver.kazdan_warner import SolverConfig, solve_kazdan_warner

__all__ = ['SolutionPair', 'build_pair', 'continuation_sweep', 'grid_for_field', 'self_dual_mu',
           'bogomolny_residuals', 'covariant_derivatives']

logger = logging.getLogger(__name__)


def self_dual_mu(H_int):
    """mu of the self-dual pair at internal field H_int"""
    return H_int / (math.pi * defaults.SQRT2)


@dataclass(frozen=True, eq=False)
class SolutionPair:
    """
    A solved self-dual pair with its cached integrals over the unit cell

    f is None for the degenerate pair at H_int = 1/sqrt(2), where u and a vanish.
    """
    lattice: Lattice
    grid: Grid
    theta: ThetaParams
    H_int: float
    mu: float
    f: Optional[ScalarField]
    u: SectionField
    a: VectorField
    curl_a: ScalarField
    norm_u2: float                  # integral of |u|^2
    potential_integral: float       # integral of (1 - |u|^2)^2
    curl_energy: float              # integral of (curl a)^2
    kinetic_integral: float         # integral of |i grad u + (A0 + a) u|^2
    degenerate: bool = False
    diagnostics: Optional[SolveDiagnostics] = None

    def summary(self):
        return {
            'H_int': self.H_int,
            'mu': self.mu,
            'grid_n': self.grid.n,
            'degenerate': self.degenerate,
            'norm_u2': self.norm_u2,
            'potential_integral': self.potential_integral,
            'curl_energy': self.curl_energy,
            'kinetic_integral': self.kinetic_integral,
        }


def covariant_derivatives(u, a):
    """
    X = i grad u + C u with C = A0 + a, returned as (X_x, X_y, C_x, C_y)
    """
    grid = u.grid
    cx, cy = -math.pi * grid.y + a.ax, math.pi * grid.x + a.ay
    return 1j * u.grad_x + cx * u.values, 1j * u.grad_y + cy * u.values, cx, cy


def bogomolny_residuals(u, a, mu):
    """
    Max-norms of D+ u and of 2 mu pi + mu curl a - (1 - |u|^2)

    D+ u = du/dx + i du/dy + (C_y - i C_x) u.
    """
    if u.grad_x is None:
        raise ContractError('Section has no derivatives')
    _, _, cx, cy = covariant_derivatives(u, a)
    d_plus = u.grad_x + 1j * u.grad_y + (cy - 1j * cx) * u.values
    second = 2.0 * mu * math.pi + mu * curl(a).values - (1.0 - u.modulus_squared())
    return float(np.max(np.abs(d_plus))), float(np.max(np.abs(second)))


def grid_for_field(lat, H_int, cfg):
    """Grid used at H_int: cfg.grid_n, escalated in the small-field regime"""
    n = cfg.grid_n
    for threshold, escalated in defaults.GRID_ESCALATION:
        if H_int < threshold:
            n = max(n, escalated)
            break
    return make_grid(lat, n)


def _degenerate_pair(lat, grid, theta, H_int):
    zeros = np.zeros(grid.shape)
    u = SectionField(lat, grid, zeros, zeros, zeros, zeros, source=SectionSource.BOGOMOLNY)
    logger.info('H_int=%.8g is at the bifurcation point, reporting the vanishing pair', H_int)
    return SolutionPair(lat, grid, theta, float(H_int), self_dual_mu(H_int), None, u, VectorField.zeros(grid),
                        ScalarField(grid, zeros), 0.0, 1.0, 0.0, 0.0, degenerate=True)


def _check_H(H_int):
    if not isinstance(H_int, (int, float)) or isinstance(H_int, bool):
        raise TypeError('Expected H_int to be a real number')
    if not H_int > 0:
        raise DomainError('Expected H_int > 0, got ' + repr(H_int))
    A = 1.0 - defaults.SQRT2 * H_int
    if abs(A) < defaults.A_FLOOR:
        return A, True
    if A < 0:
        raise DomainError('H_int above 1/sqrt(2) has no self-dual vortex pair, got ' + repr(H_int))
    return A, False


def _validate(pair, cfg):
    """Raise IntegrityError when the pair breaks one of its defining identities"""
    d_plus, second = bogomolny_residuals(pair.u, pair.a, pair.mu)
    tolerance = max(defaults.IDENTITY_TOL, 10.0 * cfg.tol_residual)
    if d_plus > tolerance:
        raise IntegrityError('D+ u does not vanish', check='d_plus', value=d_plus)
    if second > tolerance:
        raise IntegrityError('Second Bogomolny equation violated', check='bogomolny_field', value=second)
    expected = 1.0 - defaults.SQRT2 * pair.H_int
    if abs(pair.norm_u2 - expected) > defaults.IDENTITY_TOL:
        raise IntegrityError('Integral of |u|^2 differs from 1 - sqrt(2) H', check='norm_u2',
                             value=pair.norm_u2 - expected)
    modulus = float(np.max(np.sqrt(pair.u.modulus_squared())))
    if modulus > 1.0 + defaults.MODULUS_TOL:
        raise IntegrityError('|u| exceeds 1', check='modulus', value=modulus)


def _assemble(lat, grid, theta, H_int, cfg, init=None):
    A, degenerate = _check_H(H_int)
    if degenerate:
        return _degenerate_pair(lat, grid, theta, H_int)
    mu = self_dual_mu(H_int)
    u0 = eval_u0(lat, grid, theta)
    h = ScalarField(grid, u0.modulus_squared())
    if init is not None and init.grid is not grid:
        init = resample(init, grid.n)
    try:
        f = solve_kazdan_warner(h, A, mu, cfg, init=init)
    except SolverError as e:
        e.H_int = float(H_int)
        raise

    grad = gradient(f)
    lap = laplacian(f).values
    ef = np.exp(f.values)
    fx, fy = grad.ax, grad.ay
    u = SectionField(lat, grid,
                     u0.values * ef,
                     ef * (u0.grad_x + u0.values * fx),
                     ef * (u0.grad_y + u0.values * fy),
                     ef * (u0.laplacian + 2.0 * (u0.grad_x * fx + u0.grad_y * fy) + u0.values * (lap + fx * fx + fy * fy)),
                     source=SectionSource.BOGOMOLNY, sampler=u0.sampler)
    a = skew_gradient(f)
    curl_a = ScalarField(grid, -lap)
    modulus = u.modulus_squared()
    xx, xy, _, _ = covariant_derivatives(u, a)
    pair = SolutionPair(lat, grid, theta, float(H_int), mu, f, u, a, curl_a,
                        float(np.mean(modulus)),
                        float(np.mean((1.0 - modulus) ** 2)),
                        float(np.mean(lap * lap)),
                        float(np.mean(np.abs(xx) ** 2 + np.abs(xy) ** 2)),
                        diagnostics=f.diagnostics)
    _validate(pair, cfg)
    return pair


@cached(max_size=defaults.PAIR_CACHE_SIZE)
def build_pair(lat, grid, theta, H_int, cfg):
    """
    Solve and assemble the self-dual pair at H_int on the given grid

    :param lat:     Lattice
    :param grid:    Grid of lat
    :param theta:   ThetaParams for u0
    :param H_int:   internal field in (0, 1/sqrt(2)]; within A_FLOOR of 1/sqrt(2) the vanishing pair is returned
    :param cfg:     SolverConfig

    :raises DomainError:    H_int <= 0 or above 1/sqrt(2)
    :raises SolverError:    the Newton iteration failed
    :raises IntegrityError: the assembled pair violates a Bogomolny identity
    """
    if not isinstance(grid, Grid) or grid.lattice != lat:
        raise ContractError('Expected a Grid built on the given lattice')
    return _assemble(lat, grid, theta, H_int, cfg)


def _intermediate_fields(previous, target, step):
    """Fields strictly between previous and target, at most step apart"""
    count = int(math.ceil((previous - target) / step - 1e-12))
    return [previous - (previous - target) * i / count for i in range(1, count)]


def continuation_sweep(lat, H_list, cfg=None):
    """
    Solve the self-dual pairs along descending fields, each warm-started from the previous solution

    When consecutive fields are more than cfg.continuation_step apart, unreported intermediate solves
    bridge the gap. The grid follows grid_for_field; warm starts are resampled when it is escalated.

    :return: SweepResult(pairs, failure); on the first error the completed prefix is returned with it
    :raises DomainError: H_list is empty, not strictly descending or leaves (0, 1/sqrt(2)]
    """
    cfg = cfg or SolverConfig()
    H_list = [float(H) for H in H_list]
    if not H_list:
        raise DomainError('Expected at least one field value')
    if any(b >= a for a, b in zip(H_list, H_list[1:])):
        raise DomainError('Expected field values sorted strictly descending')
    for H in H_list:
        _check_H(H)

    pairs = []
    previous_f = None
    previous_H = None
    for H in H_list:
        try:
            if previous_f is not None:
                for bridge in _intermediate_fields(previous_H, H, cfg.continuation_step):
                    grid = grid_for_field(lat, bridge, cfg)
                    previous_f = _assemble(lat, grid, cfg.theta, bridge, cfg, previous_f).f
            grid = grid_for_field(lat, H, cfg)
            pair = _assemble(lat, grid, cfg.theta, H, cfg, previous_f)
        except SelfDualError as e:
            logger.warning('continuation stopped at H_int=%.6g: %s', H, e)
            return SweepResult(tuple(pairs), e)
        pairs.append(pair)
        previous_f, previous_H = pair.f, H
        logger.info('H_int=%.4f solved on n=%d, integral |u|^2 = %.9f', H, grid.n, pair.norm_u2)
    return SweepResult(tuple(pairs), None)
