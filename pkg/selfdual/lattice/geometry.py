from dataclasses import dataclass, field
import math

import numpy as np

from selfdual.selfdual import cached
from selfdual.constant import defaults
from selfdual.errors import DomainError, ConfigurationError

__all__ = ['Lattice', 'Grid', 'make_lattice', 'make_grid', 'lattice_from_basis', 'boundary_phase']


def _read_only(array):
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Lattice:
    """
    Unit-area lattice generated by v1 = (u, 0) and v2 = (w, r), with r = 1/u

    Lattices compare and hash by value, so they can key the result caches.
    """
    u: float
    w: float
    r: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.u, (int, float)) or not isinstance(self.w, (int, float)):
            raise TypeError('Expected u and w to be real numbers')
        if not self.u > 0 or not math.isfinite(self.u):
            raise DomainError('Expected u to be a positive real number, got ' + repr(self.u))
        if not math.isfinite(self.w):
            raise DomainError('Expected w to be finite, got ' + repr(self.w))
        object.__setattr__(self, 'u', float(self.u))
        object.__setattr__(self, 'w', float(self.w))
        object.__setattr__(self, 'r', 1.0 / self.u)

    @property
    def basis(self):
        """2x2 matrix whose columns are v1 and v2"""
        return np.array([[self.u, self.w], [0.0, self.r]])

    @property
    def v1(self):
        return np.array([self.u, 0.0])

    @property
    def v2(self):
        return np.array([self.w, self.r])

    def to_cartesian(self, s, t):
        """Map lattice coordinates (s, t) to z = s*v1 + t*v2"""
        return s * self.u + t * self.w, t * self.r

    def to_lattice(self, x, y):
        """Inverse of to_cartesian"""
        t = y * self.u
        return (x - t * self.w) * self.r, t

    def vector(self, m, n):
        """Lattice vector m*v1 + n*v2"""
        return np.array([m * self.u + n * self.w, n * self.r])

    def reduce(self, x, y):
        """
        Translate (x, y) into the fundamental domain [0,1)^2 of lattice coordinates

        :return: (x0, y0, v) with (x, y) = (x0, y0) + v and v a lattice vector
        """
        s, t = self.to_lattice(x, y)
        m, n = math.floor(s), math.floor(t)
        v = self.vector(m, n)
        return x - v[0], y - v[1], v


def make_lattice(u, w=0.0):
    """
    Build the canonical unit-area lattice with v1 = (u, 0), v2 = (w, 1/u)

    :param u:   length of the first basis vector, must be positive
    :param w:   shear of the second basis vector
    """
    return Lattice(u, w)


def lattice_from_basis(v1, v2):
    """
    Rotate and rescale an arbitrary basis into the canonical form

    The basis is rotated so that v1 lies on the positive x axis and scaled to unit cell area;
    v2 is negated when needed so that the height r is positive (the lattice is unchanged).

    :raises DomainError: when v1 and v2 are collinear
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    det = v1[0] * v2[1] - v1[1] * v2[0]
    length = math.hypot(v1[0], v1[1])
    if length == 0.0 or abs(det) < 1e-14 * max(1.0, length * float(np.linalg.norm(v2))):
        raise DomainError('Basis vectors are collinear')
    scale = math.sqrt(abs(det))
    along = (v1 @ v2) / length
    height = det / length
    if height < 0:
        along, height = -along, -height
    return make_lattice(length / scale, along / scale)


def boundary_phase(lat, m, n, x, y):
    """
    Transition factor of the line bundle along v = m*v1 + n*v2:
    u(z + v) = boundary_phase(lat, m, n, x, y) * u(z)

    Composing the factors of v1 and v2 leaves the sign (-1)^(m*n) on top of exp(i*pi*(v_x*y - v_y*x)).
    """
    v = lat.vector(m, n)
    sign = -1.0 if (m * n) % 2 else 1.0
    return sign * np.exp(1j * math.pi * (v[0] * y - v[1] * x))


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Corner-anchored n x n sampling of the fundamental domain of a lattice

    Arrays are indexed [j, i] with s = i/n along axis 1 and t = j/n along axis 0. Fourier mode
    (p, q) runs along the same axes, and its Cartesian wavevector is 2*pi*B^{-T}(p, q).

    Grids compare by identity; make_grid is cached so equal (lattice, n) yield the same object.
    """
    lattice: Lattice
    n: int
    s: np.ndarray
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    kx: np.ndarray          # Cartesian wavevector components, Nyquist modes included
    ky: np.ndarray
    k2: np.ndarray          # |K|^2
    dx: np.ndarray          # first-derivative multipliers i*K with Nyquist modes zeroed
    dy: np.ndarray

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def coords_lat(self):
        return np.stack([self.s, self.t], axis=-1)

    @property
    def coords_xy(self):
        return np.stack([self.x, self.y], axis=-1)

    @property
    def wavevectors(self):
        return np.stack([self.kx, self.ky], axis=-1)

    def wavevector(self, p, q):
        """Cartesian wavevector of the lattice frequency pair (p, q)"""
        lat = self.lattice
        return 2.0 * math.pi * lat.r * p, 2.0 * math.pi * (-lat.w * p + lat.u * q)

    def compatible(self, other):
        return other is self or (other.lattice == self.lattice and other.n == self.n)


def make_grid(lat, n=defaults.GRID_N):
    """
    Sample the fundamental domain of lat with n points per lattice direction

    :raises ConfigurationError: when n is odd or smaller than 8
    """
    if not isinstance(lat, Lattice):
        raise TypeError('Expected lat to be a Lattice')
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError('Expected n to be an integer')
    if n < defaults.MIN_GRID_N or n % 2:
        raise ConfigurationError('Grid size must be even and at least ' + str(defaults.MIN_GRID_N) +
                                 ', got ' + str(n))
    return _make_grid(lat, n)


# Unbounded: one Grid object per (lattice, n), since the other caches key grids by identity
@cached
def _make_grid(lat, n):
    ticks = np.arange(n) / n
    s, t = np.meshgrid(ticks, ticks, indexing='xy')
    x, y = lat.to_cartesian(s, t)
    freq = np.fft.fftfreq(n, d=1.0 / n)
    p, q = np.meshgrid(freq, freq, indexing='xy')
    kx = 2.0 * math.pi * lat.r * p
    ky = 2.0 * math.pi * (-lat.w * p + lat.u * q)
    nyquist = (np.abs(p) == n // 2) | (np.abs(q) == n // 2)
    dx = np.where(nyquist, 0.0, 1j * kx)
    dy = np.where(nyquist, 0.0, 1j * ky)
    arrays = [_read_only(a) for a in (s, t, x, y, kx, ky, kx ** 2 + ky ** 2, dx, dy)]
    return Grid(lat, n, *arrays)
