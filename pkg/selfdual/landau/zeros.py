import logging
import math

import numpy as np

from selfdual.errors import ContractError, IntegrityError
from selfdual.lattice.geometry import boundary_phase
from selfdual.model import ZeroLocation

__all__ = ['locate_zero', 'cell_windings']

logger = logging.getLogger(__name__)

# Node values below this fraction of the maximum count as zeros lying on the contour
_ZERO_FRACTION = 1e-12
# Contour offsets, in cells, tried in turn when a node falls on a zero
_OFFSETS = ((0.5, 0.5), (0.25, 0.75))
_BISECTIONS = 2


def cell_windings(nodes):
    """
    Winding number of the phase around every cell of an (m+1) x (m+1) array of nodes

    Cells are traversed counterclockwise in lattice coordinates: axis 1 is s, axis 0 is t.
    """
    def step(a, b):
        return np.angle(b * np.conj(a))

    total = (step(nodes[:-1, :-1], nodes[:-1, 1:]) + step(nodes[:-1, 1:], nodes[1:, 1:])
             + step(nodes[1:, 1:], nodes[1:, :-1]) + step(nodes[1:, :-1], nodes[:-1, :-1]))
    return np.rint(total / (2.0 * math.pi)).astype(int)


def _grid_nodes(field):
    """Grid values closed across the seam with the bundle transition rule"""
    grid, lat = field.grid, field.lattice
    n = grid.n
    nodes = np.empty((n + 1, n + 1), dtype=complex)
    nodes[:n, :n] = field.values
    nodes[:n, n] = field.values[:, 0] * boundary_phase(lat, 1, 0, grid.x[:, 0], grid.y[:, 0])
    nodes[n, :n] = field.values[0, :] * boundary_phase(lat, 0, 1, grid.x[0, :], grid.y[0, :])
    nodes[n, n] = field.values[0, 0] * boundary_phase(lat, 1, 1, grid.x[0, 0], grid.y[0, 0])
    return nodes


def _sampled_nodes(field, offset):
    n = field.grid.n
    ticks = np.arange(n + 1)
    s, t = np.meshgrid((ticks + offset[0]) / n, (ticks + offset[1]) / n, indexing='xy')
    x, y = field.lattice.to_cartesian(s, t)
    return field.sampler(x, y), s, t


def _on_contour(nodes):
    scale = np.max(np.abs(nodes))
    return scale == 0.0 or bool(np.any(np.abs(nodes) < _ZERO_FRACTION * scale))


def _refine(field, s0, t0, size):
    """Bisect the cell [s0, s0+size] x [t0, t0+size] holding the zero; returns lattice coordinates"""
    lat = field.lattice
    for _ in range(_BISECTIONS):
        half = size / 2.0
        s, t = np.meshgrid(s0 + half * np.arange(3), t0 + half * np.arange(3), indexing='xy')
        values = field.sampler(*lat.to_cartesian(s, t))
        scale = np.max(np.abs(values))
        hit = np.argwhere(np.abs(values) < _ZERO_FRACTION * scale)
        if hit.size:
            j, i = hit[0]
            return s[j, i], t[j, i]
        windings = cell_windings(values)
        cells = np.argwhere(windings != 0)
        if len(cells) != 1:
            # zero too close to a sub-cell edge to resolve further
            break
        j, i = cells[0]
        s0, t0, size = s0 + i * half, t0 + j * half, half
    return s0 + size / 2.0, t0 + size / 2.0


def locate_zero(field):
    """
    Find the zero of a section of the degree-one bundle from phase windings on grid cells

    When a grid node lies on the zero, the contour is shifted by half a cell and re-sampled with the
    field's sampler; the zero is then refined by two bisection steps.

    :return: ZeroLocation(point=(x, y) in the fundamental domain, winding=total winding)
    :raises IntegrityError:  when the total winding is not 1
    :raises ContractError:   when a shifted contour is needed but the field has no sampler
    """
    n = field.grid.n
    nodes = _grid_nodes(field)
    origin = (0.0, 0.0)
    if _on_contour(nodes):
        if field.sampler is None:
            raise ContractError('Zero lies on the sampling contour and the section has no sampler to shift it')
        for origin in _OFFSETS:
            nodes, _, _ = _sampled_nodes(field, origin)
            if not _on_contour(nodes):
                break
            logger.debug('zero on contour shifted by %s, trying the next offset', origin)
        else:
            raise IntegrityError('Zero lies on every sampling contour tried', check='zero_contour')
    windings = cell_windings(nodes)
    total = int(windings.sum())
    if total != 1:
        raise IntegrityError('Total winding of the section is ' + str(total) + ', expected 1',
                             check='winding', value=total)
    cells = np.argwhere(windings != 0)
    if len(cells) > 1:
        logger.warning('phase winds around %d cells; reporting the first with winding 1', len(cells))
    j, i = next(c for c in cells if windings[c[0], c[1]] == 1)
    s0, t0 = (i + origin[0]) / n, (j + origin[1]) / n
    if field.sampler is not None:
        s, t = _refine(field, s0, t0, 1.0 / n)
    else:
        s, t = s0 + 0.5 / n, t0 + 0.5 / n
    x, y, _ = field.lattice.reduce(*field.lattice.to_cartesian(s, t))
    return ZeroLocation((float(x), float(y)), total)
