"""
Energy of a pair (u, a) on the unit cell and the identities it satisfies

For coupling k and internal field H_int, with mu = H_int / (2 pi k) and C = A0 + a:

    E_{k,H_int}(u, a) = integral of (mu/2)|i grad u + C u|^2 + (1/4)(1 - |u|^2)^2 + (mu^2 k^2 / 2)(curl a)^2

At k = 1/sqrt(2) the energy splits as mu pi - (mu pi)^2 + A+(u, a) for every admissible pair.
"""
import math

import numpy as np

from selfdual.constant import defaults
from selfdual.constant.flag import SectionSource
from selfdual.errors import ContractError, DomainError
from selfdual.landau.groundstate import SectionField, apply_magnetic_hamiltonian
from selfdual.lattice.spectral import VectorField, curl, laplacian, leray_project, ScalarField
from selfdual.model import EnergyReport
from selfdual.solver.bogomolny import covariant_derivatives

__all__ = ['energy_internal', 'energy_total', 'a_plus', 'bkn_defect', 'm_E_closed_form', 'gl_residual',
           'normal_state_energy', 'pure_state_energy', 'instability_coefficient', 'trivial_pair', 'energy_mu']


def energy_mu(k, H_int):
    if not k > 0:
        raise DomainError('Expected k > 0, got ' + repr(k))
    if not H_int > 0:
        raise DomainError('Expected H_int > 0, got ' + repr(H_int))
    return H_int / (2.0 * math.pi * k)


def trivial_pair(lat, grid):
    """The pair (0, 0) on a grid"""
    zeros = np.zeros(grid.shape)
    return (SectionField(lat, grid, zeros, zeros, zeros, zeros, source=SectionSource.COMBINED),
            VectorField.zeros(grid))


def _check_pair(u, a):
    if not isinstance(u, SectionField) or not isinstance(a, VectorField):
        raise TypeError('Expected a SectionField and a VectorField')
    if not u.grid.compatible(a.grid):
        raise ContractError('Section and potential live on different grids')
    if not u.has_derivatives:
        raise ContractError('Section has no derivatives')


def _terms(u, a, k, H_int):
    """(kinetic, potential, field, integral of (curl a)^2, curl a samples) of E_{k,H_int}"""
    _check_pair(u, a)
    mu = energy_mu(k, H_int)
    xx, xy, _, _ = covariant_derivatives(u, a)
    curl_a = curl(a).values
    curl_energy = float(np.mean(curl_a * curl_a))
    kinetic = 0.5 * mu * float(np.mean(np.abs(xx) ** 2 + np.abs(xy) ** 2))
    potential = 0.25 * float(np.mean((1.0 - u.modulus_squared()) ** 2))
    field = 0.5 * mu * mu * k * k * curl_energy
    return kinetic, potential, field, curl_energy, curl_a


def a_plus(u, a, H_int, k=defaults.SELF_DUAL_K):
    """
    A+(u, a) = integral of (mu/2)|D+ u|^2 + (1/4)(mu curl C - (1 - |u|^2))^2, with curl C = 2 pi + curl a

    Vanishes exactly on solutions of the Bogomolny equations.
    """
    _check_pair(u, a)
    mu = energy_mu(k, H_int)
    _, _, cx, cy = covariant_derivatives(u, a)
    d_plus = u.grad_x + 1j * u.grad_y + (cy - 1j * cx) * u.values
    gap = mu * (2.0 * math.pi + curl(a).values) - (1.0 - u.modulus_squared())
    return float(np.mean(0.5 * mu * np.abs(d_plus) ** 2 + 0.25 * gap * gap))


def _bkn_defect(internal, curl_energy, mu, k, A_plus):
    mu_pi = mu * math.pi
    return abs(internal - (mu_pi - mu_pi * mu_pi + A_plus + 0.5 * mu * mu * (k * k - 0.5) * curl_energy))


def energy_internal(u, a, k, H_int):
    """
    Decomposed internal energy E_{k,H_int}(u, a)

    magnetic_gap is 0 and total equals internal; a_plus and bkn_defect use the same mu.
    The defect compares against mu pi - (mu pi)^2 + A+ + (mu^2/2)(k^2 - 1/2) integral (curl a)^2,
    which is the Bochner-Kodaira-Nakano identity at k = 1/sqrt(2).
    """
    kinetic, potential, field, curl_energy, _ = _terms(u, a, k, H_int)
    internal = kinetic + potential + field
    value = a_plus(u, a, H_int, k)
    defect = _bkn_defect(internal, curl_energy, energy_mu(k, H_int), k, value)
    return EnergyReport(kinetic, potential, field, internal, 0.0, internal, value, defect)


def energy_total(u, a, k, H_int, H_ext):
    """E_{k,H_int}(u, a) + (H_int - H_ext)^2 / 2"""
    if not H_ext > 0:
        raise DomainError('Expected H_ext > 0, got ' + repr(H_ext))
    report = energy_internal(u, a, k, H_int)
    gap = 0.5 * (H_int - H_ext) ** 2
    return report._replace(magnetic_gap=gap, total=report.internal + gap)


def bkn_defect(u, a, H_int, k=defaults.SELF_DUAL_K):
    """|E_{k,H_int} - (mu pi - (mu pi)^2 + A+ + (mu^2/2)(k^2 - 1/2) integral (curl a)^2)|"""
    return energy_internal(u, a, k, H_int).bkn_defect


def m_E_closed_form(H_int):
    """Minimal internal energy at the self-dual coupling"""
    if not H_int > 0:
        raise DomainError('Expected H_int > 0, got ' + repr(H_int))
    if H_int <= defaults.SELF_DUAL_K:
        value = H_int / defaults.SQRT2
        return value - value * value
    return 0.25


def normal_state_energy():
    return 0.25


def pure_state_energy(H_ext):
    if not H_ext >= 0:
        raise DomainError('Expected H_ext >= 0, got ' + repr(H_ext))
    return 0.5 * H_ext * H_ext


def instability_coefficient(k, H_ext):
    """
    Second-order coefficient of the energy along (alpha u0 / |u0|, 0) at H_int = H_ext:
    E = 1/4 + instability_coefficient * alpha^2 + o(alpha^2); negative means (0, 0) is unstable
    """
    if not k > 0 or not H_ext > 0:
        raise DomainError('Expected k > 0 and H_ext > 0')
    return 0.5 * (H_ext / k - 1.0)


def gl_residual(u, a, k, H_int):
    """
    Max-norms of the two Ginzburg-Landau equations

        mu (i grad + C)^2 u - (1 - |u|^2) u
        lap a - (1 / (mu k^2)) P[Re(conj(u) (i grad u + C u))]

    where P projects onto divergence-free zero-mean fields. a must be divergence free.
    """
    _check_pair(u, a)
    mu = energy_mu(k, H_int)
    first = mu * apply_magnetic_hamiltonian(u, a) - (1.0 - u.modulus_squared()) * u.values
    xx, xy, _, _ = covariant_derivatives(u, a)
    current = leray_project(VectorField(u.grid, (np.conj(u.values) * xx).real, (np.conj(u.values) * xy).real))
    scale = 1.0 / (mu * k * k)
    lap_x = laplacian(ScalarField(a.grid, a.ax)).values
    lap_y = laplacian(ScalarField(a.grid, a.ay)).values
    second = np.hypot(lap_x - scale * current.ax, lap_y - scale * current.ay)
    return float(np.max(np.abs(first))), float(np.max(second))
