"""
Critical fields near the triple point k = H_ext = 1/sqrt(2)

The self-dual pairs serve as quasimodes of
    H_k(u, a) = (1/(4 pi k)) int |i grad u + C u|^2 + sqrt((1/2 + int (curl a)^2 / (8 pi^2)) * int (1 - |u|^2)^2)
whose infimum over all admissible pairs is H_c1(k). Minimizing over the family therefore gives an upper
bound, and monotonicity of k H_c1(k) gives the lower bound 1/(2k).
"""
from concurrent.futures import ThreadPoolExecutor
import logging
import math

import numpy as np

from selfdual.selfdual import cached
from selfdual.constant import defaults
from selfdual.constant.flag import Phase
from selfdual.errors import DomainError
from selfdual.lattice.spectral import curl
from selfdual.model import Bound, DiagramRow, HkValue, PhasePoint, SlopeCheck, SlopeEstimate
from selfdual.solver.bogomolny import continuation_sweep, covariant_derivatives
from selfdual.solver.kazdan_warner import SolverConfig

__all__ = ['h_k_functional', 'h_k_of_pair', 'hc1_upper_bound', 'hc1_lower_bound', 'hc2', 'chi', 'estimate_S',
           'quasimode_family', 'slope_from_chis', 'classify', 'diagram_emit', 'slope_sandwich']

logger = logging.getLogger(__name__)

_K0 = defaults.SELF_DUAL_K
_EPS = 1e-12


def _require_type_two(k):
    if not k >= _K0 - _EPS:
        raise DomainError('Expected k >= 1/sqrt(2), got ' + repr(k))


def _h_k(kinetic, curl_energy, potential, k):
    weight = 0.5 + curl_energy / (8.0 * math.pi ** 2)
    quasi = kinetic / (4.0 * math.pi * k)
    if potential == 0.0:
        return HkValue(quasi, None, True)
    return HkValue(quasi + math.sqrt(weight * potential), 0.5 * math.sqrt(potential / weight), False)


def h_k_functional(u, a, k):
    """
    H_k(u, a) and the internal field minimizing the energy bound at fixed (u, a)

    :return: HkValue(value, H_int_opt, degenerate); when |u| = 1 everywhere the potential integral
             vanishes, only the kinetic term remains and H_int_opt is None
    """
    _require_type_two(k)
    xx, xy, _, _ = covariant_derivatives(u, a)
    curl_a = curl(a).values
    return _h_k(float(np.mean(np.abs(xx) ** 2 + np.abs(xy) ** 2)), float(np.mean(curl_a * curl_a)),
                float(np.mean((1.0 - u.modulus_squared()) ** 2)), k)


def h_k_of_pair(pair, k):
    """h_k_functional from the cached integrals of a solved pair"""
    _require_type_two(k)
    return _h_k(pair.kinetic_integral, pair.curl_energy, pair.potential_integral, k)


def chi(pair):
    """chi(H) = 1 - sqrt(2) H - H / (2 pi^2 sqrt(2)) * int (curl a_H)^2"""
    H = pair.H_int
    return 1.0 - defaults.SQRT2 * H - H / (2.0 * math.pi ** 2 * defaults.SQRT2) * pair.curl_energy


def hc1_upper_bound(k, pairs):
    """
    Minimum of H_k over the solved family and the trivial pair (0, 0)

    :param k:       coupling, at least 1/sqrt(2)
    :param pairs:   nonempty sequence of SolutionPair solved at the self-dual coupling
    :return: Bound(value, witness); witness is None when the trivial pair wins
    """
    _require_type_two(k)
    pairs = tuple(pairs)
    if not pairs:
        raise DomainError('Expected at least one quasimode pair')
    best = Bound(_K0, None)
    for pair in pairs:
        value = h_k_of_pair(pair, k).value
        if value < best.value:
            best = Bound(value, pair)
    return best


def hc1_lower_bound(k):
    """1/(2k), from k H_c1(k) increasing and H_c1(1/sqrt(2)) = 1/sqrt(2)"""
    if not k >= _K0 - _EPS:
        raise DomainError('Lower bound only holds for k >= 1/sqrt(2), got ' + repr(k))
    return 1.0 / (2.0 * k)


def hc2(k):
    return max(k, _K0)


@cached(max_size=defaults.FAMILY_CACHE_SIZE)
def _solved_family(lat, H_grid, cfg):
    return continuation_sweep(lat, H_grid, cfg)


def quasimode_family(lat, H_grid=defaults.DEFAULT_H_GRID, cfg=None):
    """
    Continuation sweep of self-dual pairs over H_grid, shared by every k of a diagram

    Completed sweeps are cached; a sweep that stopped on an error is returned once and solved again on the
    next call.

    :param H_grid: descending tuple of fields
    """
    cfg = cfg or SolverConfig()
    result = _solved_family(lat, tuple(float(H) for H in H_grid), cfg)
    if result.failure is not None:
        _solved_family.cache_remove_if(lambda arguments, family: family.failure is not None)
    return result


quasimode_family.cache_info = _solved_family.cache_info
quasimode_family.cache_clear = _solved_family.cache_clear


def estimate_S(lat, H_grid=defaults.DEFAULT_H_GRID, cfg=None):
    """
    Slope constant S of the lower critical field at the self-dual point

    :return: SlopeEstimate(grid_sup, extrapolated, chis) where extrapolated is the value at H = 0 of the
             straight line through the three smallest fields (fewer when the grid is shorter)
    :raises SelfDualError: the error that stopped the sweep
    """
    H_grid = tuple(float(H) for H in H_grid)
    result = quasimode_family(lat, H_grid, cfg)
    if result.failure is not None:
        raise result.failure
    return slope_from_chis(tuple((pair.H_int, chi(pair)) for pair in result.pairs))


def slope_from_chis(chis):
    """SlopeEstimate from (H_int, chi) samples"""
    if not chis:
        raise DomainError('Expected at least one chi sample')
    grid_sup = max(value for _, value in chis)
    tail = sorted(chis)[:3]
    if len(tail) == 1:
        extrapolated = tail[0][1]
    else:
        slope, intercept = np.polyfit([H for H, _ in tail], [value for _, value in tail], 1)
        extrapolated = float(intercept)
    logger.info('S estimate: grid sup %.6f, extrapolated %.6f', grid_sup, extrapolated)
    return SlopeEstimate(grid_sup, extrapolated, chis)


def slope_sandwich(pairs, S, hs=(0.01, 0.02, 0.05), tol=defaults.SLOPE_TOL):
    """
    Check -h <= hc1_upper(1/sqrt(2) + h) - 1/sqrt(2) <= -S h for each h

    The allowance S sqrt(2) h^2 covers the curvature of the family at finite h.
    """
    checks = []
    for h in hs:
        offset = hc1_upper_bound(_K0 + h, pairs).value - _K0
        lower, upper = -h - tol, -S * h + tol + S * defaults.SQRT2 * h * h
        checks.append(SlopeCheck(h, offset, lower, upper, lower <= offset <= upper))
    return checks


def classify(k, H_ext, pairs=()):
    """
    Phase of (k, H_ext)

    Rules, in order: for k <= 1/sqrt(2), Pure up to H_ext = 1/sqrt(2) and Normal above. For larger k,
    Normal from H_ext = k on, Mixed strictly between the quasimode upper bound and k, Pure up to the lower
    bound 1/(2k), Undetermined in between.

    :param pairs: solved quasimode family; without it the upper bound is 1/sqrt(2)
    """
    if not k > 0 or not H_ext > 0:
        raise DomainError('Expected k > 0 and H_ext > 0')
    if k <= _K0:
        phase = Phase.PURE if H_ext <= _K0 else Phase.NORMAL
        return PhasePoint(k, H_ext, phase, _K0, _K0, _K0, None)
    lower = hc1_lower_bound(k)
    upper = hc1_upper_bound(k, pairs) if pairs else Bound(_K0, None)
    if H_ext >= k:
        phase = Phase.NORMAL
    elif upper.value < H_ext:
        phase = Phase.MIXED
    elif H_ext <= lower:
        phase = Phase.PURE
    else:
        phase = Phase.UNDETERMINED
    return PhasePoint(k, H_ext, phase, lower, upper.value, k, upper.witness)


def _row(k, pairs):
    if k <= _K0:
        return DiagramRow(k, _K0, _K0, _K0)
    upper = hc1_upper_bound(k, pairs).value if pairs else _K0
    return DiagramRow(k, hc1_lower_bound(k), upper, hc2(k))


def diagram_emit(k_range=defaults.DEFAULT_K_RANGE, resolution=defaults.DEFAULT_RESOLUTION, cfg=None, lat=None,
                 H_grid=defaults.DEFAULT_H_GRID, pairs=None, jobs=1):
    """
    Rows (k, hc1_lower, hc1_upper, hc2) over k_range; k = 1/sqrt(2) is always sampled when in range

    :param lat:     lattice of the quasimode family; ignored when pairs is given
    :param pairs:   solved family; when neither is given only the trivial pair bounds H_c1 from above
    :param jobs:    worker threads evaluating rows
    """
    k_min, k_max = float(k_range[0]), float(k_range[1])
    if not 0 < k_min < k_max:
        raise DomainError('Expected 0 < k_min < k_max')
    if not isinstance(resolution, int) or resolution < 2:
        raise DomainError('Expected resolution to be an integer >= 2')
    if pairs is None and lat is not None:
        result = quasimode_family(lat, tuple(H_grid), cfg)
        if result.failure is not None:
            raise result.failure
        pairs = result.pairs
    pairs = tuple(pairs or ())
    ks = list(np.linspace(k_min, k_max, resolution))
    if k_min <= _K0 <= k_max:
        ks = sorted(set(ks) | {_K0})
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(lambda k: _row(float(k), pairs), ks))
