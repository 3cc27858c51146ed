"""
Lowest Landau level of the magnetic Laplacian on a unit-area torus

Sections of the degree-one bundle obey u(z + v) = exp(i*pi*(v_x*y - v_y*x)) * u(z) for every lattice
vector v. They are not periodic, so their derivatives are taken term by term on the theta series
instead of by FFT; the periodic machinery of selfdual.lattice.spectral is kept for |u|^2, f and a.
"""
from dataclasses import dataclass
from functools import partial
import math
from typing import Callable, Optional, Tuple

import numpy as np

from selfdual.selfdual import cached
from selfdual.constant import defaults
from selfdual.constant.flag import SectionSource
from selfdual.errors import ConfigurationError, ContractError
from selfdual.lattice.geometry import Lattice, Grid
from selfdual.model import SectionSample

__all__ = ['ThetaParams', 'SectionField', 'eval_section', 'eval_u0', 'eval_u_h', 'eval_A0',
           'apply_L_plus', 'apply_magnetic_hamiltonian', 'rayleigh_quotient', 'combine_sections',
           'lowest_landau_level']

# Lowest eigenvalue of (i*grad + A0)^2
lowest_landau_level = 2.0 * math.pi


@dataclass(frozen=True)
class ThetaParams:
    """Truncation of the theta series: terms with |m| <= truncation are summed"""
    truncation: int = defaults.THETA_TRUNCATION

    def __post_init__(self):
        if not isinstance(self.truncation, int) or isinstance(self.truncation, bool):
            raise TypeError('Expected truncation to be an integer')
        if self.truncation < 1:
            raise ConfigurationError('Expected theta truncation >= 1, got ' + str(self.truncation))

    def check_tail(self, lat, y):
        """
        Raise ConfigurationError unless the first omitted term is below THETA_TAIL_TOL for every y

        The omitted terms are bounded by exp(-pi*((N + 1)*r - max|y|)^2).
        """
        y_max = float(np.max(np.abs(y))) if np.size(y) else 0.0
        margin = (self.truncation + 1) * lat.r - y_max
        if margin <= 0 or math.exp(-math.pi * margin * margin) >= defaults.THETA_TAIL_TOL:
            raise ConfigurationError('Theta truncation ' + str(self.truncation) + ' is too small for |y| up to ' +
                                     '{:.3g}'.format(y_max) + ' on this lattice')


@dataclass(frozen=True, eq=False)
class SectionField:
    """
    Samples of a section of the degree-one bundle on a grid, with its derivatives when known

    source tells how the samples were produced. sampler, when present, evaluates a section with the same
    zeros at arbitrary points (x, y) and is used to refine zero locations.
    """
    lattice: Lattice
    grid: Grid
    values: np.ndarray
    grad_x: Optional[np.ndarray] = None
    grad_y: Optional[np.ndarray] = None
    laplacian: Optional[np.ndarray] = None
    source: Optional[SectionSource] = None
    sampler: Optional[Callable] = None
    shift: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.grid.lattice != self.lattice:
            raise ContractError('Grid does not belong to the lattice of the section')
        for name in ('values', 'grad_x', 'grad_y', 'laplacian'):
            array = getattr(self, name)
            if array is None:
                continue
            array = np.array(array, dtype=complex)
            if array.shape != self.grid.shape:
                raise ContractError('Expected ' + name + ' of shape ' + str(self.grid.shape))
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @property
    def has_derivatives(self):
        return self.grad_x is not None and self.grad_y is not None and self.laplacian is not None

    def modulus_squared(self):
        return (self.values * np.conj(self.values)).real

    def norm_squared(self):
        """Integral of |u|^2 over the cell"""
        return float(np.mean(self.modulus_squared()))


def _theta_terms(lat, theta, x, y):
    """u0 and its first and second derivatives at points (x, y) from the truncated series"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    theta.check_tail(lat, y)
    r = lat.r
    m = np.arange(-theta.truncation, theta.truncation + 1).reshape((-1, ) + (1, ) * x.ndim)
    shifted = y + m * r
    exponent = (-math.pi * shifted ** 2
                + 1j * (math.pi * m * m * lat.w * r + 2.0 * math.pi * m * r * x + math.pi * x * y))
    terms = np.exp(exponent)
    alpha = 1j * math.pi * y + 2j * math.pi * m * r           # d/dx of the exponent
    beta = 1j * math.pi * x - 2.0 * math.pi * shifted         # d/dy of the exponent
    return SectionSample(terms.sum(axis=0),
                         (alpha * terms).sum(axis=0),
                         (beta * terms).sum(axis=0),
                         ((alpha * alpha + beta * beta - 2.0 * math.pi) * terms).sum(axis=0))


def eval_section(lat, theta, x, y, h=None):
    """
    Evaluate u_h(z) = exp(i*pi*(h_y*x - h_x*y)) * u0(z - h) with its derivatives at arbitrary points

    :param lat:     a Lattice
    :param theta:   ThetaParams
    :param x:       array of abscissae
    :param y:       array of ordinates, same shape as x
    :param h:       translation (h_x, h_y); None or (0, 0) gives u0 itself

    :return: SectionSample(values, grad_x, grad_y, laplacian)
    """
    if h is None or (h[0] == 0 and h[1] == 0):
        return _theta_terms(lat, theta, x, y)
    hx, hy = float(h[0]), float(h[1])
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = _theta_terms(lat, theta, x - hx, y - hy)
    phase = np.exp(1j * math.pi * (hy * x - hx * y))
    px, py = math.pi * hy, -math.pi * hx                      # gradient of the phase angle
    return SectionSample(phase * g.values,
                         phase * (g.grad_x + 1j * px * g.values),
                         phase * (g.grad_y + 1j * py * g.values),
                         phase * (g.laplacian + 2j * (px * g.grad_x + py * g.grad_y) - (px * px + py * py) * g.values))


def _sample_values(lat, theta, h, x, y):
    return eval_section(lat, theta, x, y, h).values


@cached(max_size=defaults.SECTION_CACHE_SIZE)
def eval_u0(lat, grid, theta):
    """
    The lowest Landau level section u0 on the grid

    u0(x, y) = exp(i*pi*x*y) * sum_m exp(-pi*(y + m*r)^2) * exp(i*pi*m^2*w*r + 2*pi*i*m*r*x)

    It satisfies L+ u0 = 0, has a single simple zero per cell and, on the square lattice, vanishes
    at (1/2, 1/2).

    :raises ConfigurationError: when the truncation does not reach THETA_TAIL_TOL on this grid
    """
    if not isinstance(grid, Grid) or grid.lattice != lat:
        raise ContractError('Expected a Grid built on the given lattice')
    sample = _theta_terms(lat, theta, grid.x, grid.y)
    return SectionField(lat, grid, *sample, source=SectionSource.THETA_SERIES,
                        sampler=partial(_sample_values, lat, theta, None))


def eval_u_h(lat, grid, theta, h):
    """
    Magnetic translate u_h of u0; its zero set is z0 + h + L and L+ u_h = 2*pi*(h_x + i*h_y) * u_h
    """
    h = (float(h[0]), float(h[1]))
    if h == (0.0, 0.0):
        return eval_u0(lat, grid, theta)
    if not isinstance(grid, Grid) or grid.lattice != lat:
        raise ContractError('Expected a Grid built on the given lattice')
    sample = eval_section(lat, theta, grid.x, grid.y, h)
    return SectionField(lat, grid, *sample, source=SectionSource.TRANSLATED,
                        sampler=partial(_sample_values, lat, theta, h), shift=h)


def eval_A0(points):
    """
    Background potential A0 = pi*(-y, x), whose curl is 2*pi

    :param points: array of shape (..., 2)
    :return: array of the same shape
    """
    points = np.asarray(points, dtype=float)
    return math.pi * np.stack([-points[..., 1], points[..., 0]], axis=-1)


def _require_derivatives(field):
    if not isinstance(field, SectionField):
        raise TypeError('Expected a SectionField')
    if field.source is None or not field.has_derivatives:
        raise ContractError('Section has no analytic derivatives; build it with eval_u0, eval_u_h, '
                            'combine_sections or build_pair')


def apply_L_plus(field):
    """
    L+ = d/dx + i*d/dy + pi*(x + i*y) applied pointwise

    :return: samples of L+ u (an ndarray; the result carries no derivatives)
    """
    _require_derivatives(field)
    grid = field.grid
    return field.grad_x + 1j * field.grad_y + math.pi * (grid.x + 1j * grid.y) * field.values


def apply_magnetic_hamiltonian(field, a=None):
    """
    (i*grad + C)^2 u with C = A0 + a, for divergence-free a

    Expands to -lap u + 2i C.grad u + |C|^2 u.

    :param a: optional VectorField on the same grid
    """
    _require_derivatives(field)
    grid = field.grid
    cx, cy = -math.pi * grid.y, math.pi * grid.x
    if a is not None:
        if not grid.compatible(a.grid):
            raise ContractError('Potential and section live on different grids')
        cx, cy = cx + a.ax, cy + a.ay
    return (-field.laplacian + 2j * (cx * field.grad_x + cy * field.grad_y)
            + (cx * cx + cy * cy) * field.values)


def rayleigh_quotient(field, a=None):
    """<Hu, u> / <u, u> by grid quadrature"""
    h_u = apply_magnetic_hamiltonian(field, a)
    return float(np.mean(np.conj(field.values) * h_u).real / np.mean(field.modulus_squared()))


def combine_sections(coefficients, fields):
    """
    Linear combination sum_i c_i * u_i, derivatives carried along

    Every field must live on the same grid and carry derivatives.
    """
    coefficients = list(coefficients)
    fields = list(fields)
    if not fields or len(coefficients) != len(fields):
        raise ValueError('Expected as many coefficients as sections, and at least one of each')
    first = fields[0]
    for field in fields:
        _require_derivatives(field)
        if field.grid is not first.grid:
            raise ContractError('Sections live on different grids')

    def combine(name):
        return sum(c * getattr(f, name) for c, f in zip(coefficients, fields))

    samplers = [f.sampler for f in fields]
    sampler = None
    # the zero set of u0 * exp(f) is that of u0, so only analytic samplers combine linearly
    if all(s is not None for s in samplers) and all(f.source & SectionSource.ANALYTIC for f in fields):
        def sampler(x, y):
            return sum(c * s(x, y) for c, s in zip(coefficients, samplers))
    return SectionField(first.lattice, first.grid, combine('values'), combine('grad_x'), combine('grad_y'),
                        combine('laplacian'), source=SectionSource.COMBINED, sampler=sampler)
