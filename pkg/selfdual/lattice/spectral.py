"""Periodic fields on a Grid and their Fourier-space calculus"""
from dataclasses import dataclass

import numpy as np

from selfdual.errors import ContractError
from selfdual.lattice.geometry import Grid, make_grid

__all__ = ['ScalarField', 'VectorField', 'gradient', 'skew_gradient', 'laplacian', 'inverse_laplacian',
           'curl', 'divergence', 'leray_project', 'resample', 'band_limited_noise']


def _frozen_real(grid, values, name):
    values = np.array(values, dtype=float)
    if values.shape != grid.shape:
        raise ContractError('Expected ' + name + ' of shape ' + str(grid.shape) + ', got ' + str(values.shape))
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real L-periodic function sampled on a grid"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if not isinstance(self.grid, Grid):
            raise TypeError('Expected grid to be a Grid')
        object.__setattr__(self, 'values', _frozen_real(self.grid, self.values, 'values'))

    def mean(self):
        return float(np.mean(self.values))

    def max_norm(self):
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        _check_same_grid(self, other)
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, factor):
        return ScalarField(self.grid, self.values * factor)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    """Real L-periodic vector field (ax, ay) sampled on a grid"""
    grid: Grid
    ax: np.ndarray
    ay: np.ndarray

    def __post_init__(self):
        if not isinstance(self.grid, Grid):
            raise TypeError('Expected grid to be a Grid')
        object.__setattr__(self, 'ax', _frozen_real(self.grid, self.ax, 'ax'))
        object.__setattr__(self, 'ay', _frozen_real(self.grid, self.ay, 'ay'))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape), np.zeros(grid.shape))

    def mean(self):
        return float(np.mean(self.ax)), float(np.mean(self.ay))

    def max_norm(self):
        return float(np.max(np.hypot(self.ax, self.ay)))

    def __mul__(self, factor):
        return VectorField(self.grid, self.ax * factor, self.ay * factor)

    __rmul__ = __mul__


def _check_same_grid(*fields):
    grid = fields[0].grid
    for other in fields[1:]:
        if not grid.compatible(other.grid):
            raise ContractError('Fields live on different grids')


def _apply(grid, values, multiplier):
    return np.fft.ifft2(multiplier * np.fft.fft2(values)).real


def gradient(f):
    """(df/dx, df/dy)"""
    hat = np.fft.fft2(f.values)
    return VectorField(f.grid, np.fft.ifft2(f.grid.dx * hat).real, np.fft.ifft2(f.grid.dy * hat).real)


def skew_gradient(f):
    """(df/dy, -df/dx): divergence free, zero mean, with curl equal to -laplacian(f)"""
    grad = gradient(f)
    return VectorField(f.grid, grad.ay, -grad.ax)


def laplacian(f):
    return ScalarField(f.grid, _apply(f.grid, f.values, -f.grid.k2))


def inverse_laplacian(f):
    """
    Zero-mean solution g of laplacian(g) = f - mean(f)
    """
    k2 = f.grid.k2
    with np.errstate(divide='ignore'):
        multiplier = np.where(k2 > 0, -1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    return ScalarField(f.grid, _apply(f.grid, f.values, multiplier))


def curl(a):
    """d(ay)/dx - d(ax)/dy"""
    grid = a.grid
    return ScalarField(grid, np.fft.ifft2(grid.dx * np.fft.fft2(a.ay) - grid.dy * np.fft.fft2(a.ax)).real)


def divergence(a):
    grid = a.grid
    return ScalarField(grid, np.fft.ifft2(grid.dx * np.fft.fft2(a.ax) + grid.dy * np.fft.fft2(a.ay)).real)


def leray_project(a):
    """
    Orthogonal projection onto divergence-free fields with zero mean

    The Nyquist modes are removed, since divergence() does not see them.
    """
    grid = a.grid
    hx, hy = np.fft.fft2(a.ax), np.fft.fft2(a.ay)
    kx, ky, k2 = grid.kx, grid.ky, grid.k2
    safe = np.where(k2 > 0, k2, 1.0)
    along = (kx * hx + ky * hy) / safe
    keep = (grid.dx != 0) | (grid.dy != 0)
    px = np.where(keep, hx - kx * along, 0.0)
    py = np.where(keep, hy - ky * along, 0.0)
    return VectorField(grid, np.fft.ifft2(px).real, np.fft.ifft2(py).real)


def resample(f, n):
    """
    Trigonometric interpolation of f onto the n x n grid of the same lattice

    Used to warm-start solves when the grid is escalated. The Nyquist modes are dropped.
    """
    source = f.grid
    target = make_grid(source.lattice, n)
    if n == source.n:
        return ScalarField(target, f.values)
    m = source.n
    hat = np.fft.fftshift(np.fft.fft2(f.values)) / (m * m)
    hat[0, :] = 0.0
    hat[:, 0] = 0.0
    if n > m:
        offset = (n - m) // 2
        out = np.zeros((n, n), dtype=complex)
        out[offset:offset + m, offset:offset + m] = hat
    else:
        offset = (m - n) // 2
        out = hat[offset:offset + n, offset:offset + n].copy()
        out[0, :] = 0.0
        out[:, 0] = 0.0
    return ScalarField(target, np.fft.ifft2(np.fft.ifftshift(out)).real * (n * n))


def band_limited_noise(grid, max_mode, rng):
    """
    Random real field containing only lattice frequencies |p|, |q| <= max_mode, zero mean

    :param rng: a numpy Generator
    """
    hat = np.zeros(grid.shape, dtype=complex)
    modes = range(-max_mode, max_mode + 1)
    for p in modes:
        for q in modes:
            if (p, q) != (0, 0):
                hat[q % grid.n, p % grid.n] = rng.normal() + 1j * rng.normal()
    values = np.fft.ifft2(hat).real
    return ScalarField(grid, values / max(np.max(np.abs(values)), 1e-300))
