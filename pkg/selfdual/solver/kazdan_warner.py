"""
Spectral Newton-Krylov solver for mu * lap f = h * exp(2f) - A on the torus

Internally the unknown is g = 2f, for which the residual reads
    F(g) = (mu/2) lap g - h exp(g) + A
and each Newton correction solves the symmetric positive definite system
    (-(mu/2) lap + h exp(g)) delta = F(g)
by preconditioned conjugate gradients.
"""
from dataclasses import dataclass, field
import logging
import math
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from selfdual.selfdual import warn, ConvergenceWarning
from selfdual.constant import defaults
from selfdual.errors import ConfigurationError, ContractError, DomainError, SolverError
from selfdual.landau.groundstate import ThetaParams
from selfdual.lattice.spectral import ScalarField
from selfdual.model import SolveDiagnostics

__all__ = ['SolverConfig', 'KazdanWarnerSolution', 'solve_kazdan_warner', 'fixed_point_oracle']

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    tol_residual: float = defaults.TOL_RESIDUAL
    max_newton: int = defaults.MAX_NEWTON
    continuation_step: float = defaults.CONTINUATION_STEP
    linear_tol: float = defaults.LINEAR_TOL
    grid_n: int = defaults.GRID_N
    theta: ThetaParams = field(default_factory=ThetaParams)

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ConfigurationError('Expected tol_residual > 0')
        if not self.linear_tol > 0:
            raise ConfigurationError('Expected linear_tol > 0')
        if not self.continuation_step > 0:
            raise ConfigurationError('Expected continuation_step > 0')
        if not isinstance(self.max_newton, int) or self.max_newton < 1:
            raise ConfigurationError('Expected max_newton to be a positive integer')
        if not isinstance(self.grid_n, int) or self.grid_n < defaults.MIN_GRID_N or self.grid_n % 2:
            raise ConfigurationError('Grid size must be even and at least ' + str(defaults.MIN_GRID_N))
        if not isinstance(self.theta, ThetaParams):
            raise TypeError('Expected theta to be ThetaParams')


@dataclass(frozen=True, eq=False)
class KazdanWarnerSolution(ScalarField):
    """The solution f together with the Newton history that produced it"""
    diagnostics: Optional[SolveDiagnostics] = None


def _check_problem(h, A, mu_coeff):
    if not isinstance(h, ScalarField):
        raise TypeError('Expected h to be a ScalarField')
    if not A > 0:
        raise DomainError('Expected A > 0, got ' + repr(A))
    if not mu_coeff > 0:
        raise DomainError('Expected mu_coeff > 0, got ' + repr(mu_coeff))
    if np.any(h.values < 0):
        raise DomainError('Expected h >= 0 everywhere')
    if not np.any(h.values > 0):
        raise DomainError('Expected h not identically zero')


def _spectral_laplacian(grid, values):
    return np.fft.ifft2(-grid.k2 * np.fft.fft2(values)).real


def _residual(grid, g, h, A, half_mu):
    return half_mu * _spectral_laplacian(grid, g) - h * np.exp(g) + A


def _merit(grid, g, h, A, half_mu):
    """Energy whose gradient is -F(g): mean((mu/4)|grad g|^2 + h exp(g) - A g)"""
    hat = np.fft.fft2(g)
    dirichlet = float(np.sum(grid.k2 * np.abs(hat) ** 2)) / grid.n ** 4
    return 0.5 * half_mu * dirichlet + float(np.mean(h * np.exp(g) - A * g))


def _newton_step(grid, g, h, half_mu, rhs, linear_tol):
    """Solve (-(mu/2) lap + h exp(g)) delta = rhs; returns (delta, iterations)"""
    n = grid.n
    weight = h * np.exp(g)
    shift = max(float(np.mean(weight)), 1e-300)
    symbol = half_mu * grid.k2 + shift

    def matvec(v):
        v = v.reshape(grid.shape)
        return (-half_mu * _spectral_laplacian(grid, v) + weight * v).ravel()

    def precondition(v):
        return np.fft.ifft2(np.fft.fft2(v.reshape(grid.shape)) / symbol).real.ravel()

    operator = LinearOperator((n * n, n * n), matvec=matvec, dtype=float)
    preconditioner = LinearOperator((n * n, n * n), matvec=precondition, dtype=float)
    iterations = 0

    def count(_):
        nonlocal iterations
        iterations += 1

    delta, info = cg(operator, rhs.ravel(), x0=precondition(rhs.ravel()), rtol=linear_tol, atol=0.0,
                     maxiter=defaults.MAX_LINEAR_ITERATIONS, M=preconditioner, callback=count)
    if info > 0:
        warn('conjugate gradients stopped after {} iterations above rtol {:.1e}'.format(iterations, linear_tol),
             ConvergenceWarning)
    return delta.reshape(grid.shape), iterations


def solve_kazdan_warner(h, A, mu_coeff, cfg=None, init=None):
    """
    Solve mu_coeff * lap f = h * exp(2f) - A for the unique periodic f

    :param h:           ScalarField, nonnegative and not identically zero
    :param A:           positive constant
    :param mu_coeff:    positive coefficient of the Laplacian
    :param cfg:         SolverConfig (tolerances, iteration cap)
    :param init:        optional ScalarField starting guess on the same grid; by default the constant
                        f0 = ln(A / mean h) / 2, which already satisfies the integral constraint

    :return: KazdanWarnerSolution with max-norm residual below cfg.tol_residual
    :raises DomainError:    A <= 0, mu_coeff <= 0, h negative somewhere or identically zero
    :raises SolverError:    no convergence within cfg.max_newton iterations
    """
    cfg = cfg or SolverConfig()
    _check_problem(h, A, mu_coeff)
    grid = h.grid
    hv = h.values
    half_mu = 0.5 * mu_coeff
    if init is None:
        g = np.full(grid.shape, math.log(A / float(np.mean(hv))))
    else:
        if not grid.compatible(init.grid):
            raise ContractError('Initial guess lives on a different grid than h')
        g = 2.0 * np.array(init.values, dtype=float)

    F = _residual(grid, g, hv, A, half_mu)
    history = [float(np.max(np.abs(F)))]
    linear_total = damped = 0
    logger.debug('Kazdan-Warner solve: n=%d A=%.6g mu=%.6g initial residual %.3e', grid.n, A, mu_coeff, history[0])
    for iteration in range(1, cfg.max_newton + 1):
        if history[-1] < cfg.tol_residual:
            break
        delta, linear_iterations = _newton_step(grid, g, hv, half_mu, F, cfg.linear_tol)
        linear_total += linear_iterations
        merit = _merit(grid, g, hv, A, half_mu)
        slope = -float(np.mean(F * delta))
        l2 = float(np.sqrt(np.mean(F * F)))
        tau = 1.0
        while True:
            trial = g + tau * delta
            trial_F = _residual(grid, trial, hv, A, half_mu)
            armijo = _merit(grid, trial, hv, A, half_mu) <= merit + defaults.ARMIJO_C * tau * slope
            if (np.all(np.isfinite(trial_F)) and
                    (armijo or float(np.sqrt(np.mean(trial_F * trial_F))) < l2)) or tau <= defaults.MIN_DAMPING:
                break
            tau *= 0.5
        if tau < 1.0:
            damped += 1
        g, F = trial, trial_F
        history.append(float(np.max(np.abs(F))))
        logger.debug('newton %d: residual %.3e step %.4g cg %d', iteration, history[-1], tau, linear_iterations)

    converged = history[-1] < cfg.tol_residual
    if not converged:
        raise SolverError('Kazdan-Warner Newton iteration did not reach ' + '{:.1e}'.format(cfg.tol_residual) +
                          ' in ' + str(cfg.max_newton) + ' iterations', residual_history=history)
    diagnostics = SolveDiagnostics(True, len(history) - 1, tuple(history), linear_total, damped)
    logger.info('Kazdan-Warner converged in %d newton steps (%d cg), residual %.3e',
                diagnostics.iterations, linear_total, history[-1])
    return KazdanWarnerSolution(grid, 0.5 * g, diagnostics)


def fixed_point_oracle(h, A, mu_coeff, tol=1e-9, max_iterations=20000, tau=0.5):
    """
    Damped fixed-point iteration f <- f + tau * (mu_coeff * lap f - h exp(2f) + A)

    The Laplacian part is taken implicitly so the step is limited by the nonlinear term only. Independent
    of the Newton solver apart from the spectral Laplacian; used to cross-check it.

    :raises SolverError: when the residual is still above tol after max_iterations
    """
    _check_problem(h, A, mu_coeff)
    grid = h.grid
    hv = h.values
    f = np.full(grid.shape, 0.5 * math.log(A / float(np.mean(hv))))
    history = []
    for _ in range(max_iterations):
        nonlinear = hv * np.exp(2.0 * f)
        residual = mu_coeff * _spectral_laplacian(grid, f) - nonlinear + A
        history.append(float(np.max(np.abs(residual))))
        if history[-1] < tol:
            return ScalarField(grid, f)
        step = min(tau, 0.5 / max(float(np.max(nonlinear)), 1e-300))
        explicit = f + step * (A - nonlinear)
        f = np.fft.ifft2(np.fft.fft2(explicit) / (1.0 + step * mu_coeff * grid.k2)).real
    raise SolverError('Fixed-point oracle did not reach ' + '{:.1e}'.format(tol), residual_history=history[-20:])
