"""
Run configuration of the command line: defaults <- key=value file <- flags
"""
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from selfdual.constant import defaults
from selfdual.constant.flag import OutputFormat
from selfdual.errors import ConfigurationError, SelfDualError
from selfdual.config.lattice_presets import get_lattice_preset
from selfdual.landau.groundstate import ThetaParams
from selfdual.lattice.geometry import make_lattice
from selfdual.solver.kazdan_warner import SolverConfig

__all__ = ['RunConfig', 'load_config_file', 'build_run_config']


def _floats(text):
    try:
        return tuple(float(item) for item in str(text).replace(';', ',').split(',') if item.strip())
    except ValueError:
        raise ConfigurationError('Expected a comma separated list of numbers, got ' + repr(text))


def _pairs(text):
    pairs = []
    for chunk in str(text).split(';'):
        if chunk.strip():
            values = _floats(chunk)
            if len(values) != 2:
                raise ConfigurationError('Expected k,H_ext pairs, got ' + repr(chunk))
            pairs.append(values)
    return tuple(pairs)


def _flag(text):
    value = str(text).strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off', ''):
        return False
    raise ConfigurationError('Expected a boolean, got ' + repr(text))


def _number(kind):
    def parse(text):
        try:
            return kind(text)
        except (TypeError, ValueError):
            raise ConfigurationError('Expected ' + kind.__name__ + ', got ' + repr(text))
    return parse


@dataclass(frozen=True)
class RunConfig:
    lattice: str = 'square'
    u: Optional[float] = None
    w: float = 0.0
    grid: int = defaults.GRID_N
    theta_trunc: int = defaults.THETA_TRUNCATION
    tol: float = defaults.TOL_RESIDUAL
    H: Optional[float] = None
    H_grid: Tuple[float, ...] = defaults.DEFAULT_H_GRID
    k_range: Tuple[float, float] = defaults.DEFAULT_K_RANGE
    resolution: int = defaults.DEFAULT_RESOLUTION
    classify: Tuple[Tuple[float, float], ...] = ()
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.CSV
    jobs: int = 1
    seed: int = 0
    dump_fields: bool = False
    inject_fault: bool = False
    quiet: bool = False

    def __post_init__(self):
        if self.grid < defaults.MIN_GRID_N or self.grid % 2:
            raise ConfigurationError('grid must be even and at least ' + str(defaults.MIN_GRID_N))
        if self.theta_trunc < 1:
            raise ConfigurationError('theta_trunc must be at least 1')
        if not self.tol > 0:
            raise ConfigurationError('tol must be positive')
        if self.u is not None and not self.u > 0:
            raise ConfigurationError('u must be positive')
        if self.H is not None and not self.H > 0:
            raise ConfigurationError('H must be positive')
        if not self.H_grid or any(not 0 < H <= defaults.SELF_DUAL_K + defaults.A_FLOOR for H in self.H_grid):
            raise ConfigurationError('H_grid values must lie in (0, 1/sqrt(2)]')
        if any(b >= a for a, b in zip(self.H_grid, self.H_grid[1:])):
            raise ConfigurationError('H_grid must be strictly descending')
        if len(self.k_range) != 2 or not 0 < self.k_range[0] < self.k_range[1]:
            raise ConfigurationError('k_range must be two increasing positive numbers')
        if self.resolution < 2:
            raise ConfigurationError('resolution must be at least 2')
        if self.jobs < 1:
            raise ConfigurationError('jobs must be at least 1')
        if any(k <= 0 or H <= 0 for k, H in self.classify):
            raise ConfigurationError('classify points must be positive')

    def lattice_object(self):
        """The explicit (u, w) lattice when u is set, else the named preset"""
        if self.u is not None:
            return make_lattice(self.u, self.w)
        return get_lattice_preset(self.lattice)

    def solver_config(self):
        try:
            return SolverConfig(tol_residual=self.tol, grid_n=self.grid, theta=ThetaParams(self.theta_trunc))
        except (SelfDualError, TypeError) as e:
            raise ConfigurationError(str(e))


_PARSERS = {
    'lattice': str,
    'u': _number(float),
    'w': _number(float),
    'grid': _number(int),
    'theta_trunc': _number(int),
    'tol': _number(float),
    'H': _number(float),
    'H_grid': _floats,
    'k_range': _floats,
    'resolution': _number(int),
    'classify': _pairs,
    'out': str,
    'format': lambda text: _enum(OutputFormat, text),
    'jobs': _number(int),
    'seed': _number(int),
    'dump_fields': _flag,
    'inject_fault': _flag,
    'quiet': _flag,
}


def _enum(kind, text):
    if isinstance(text, kind):
        return text
    try:
        return kind(str(text).lower())
    except ValueError:
        raise ConfigurationError('Unrecognized ' + kind.__name__ + ' ' + repr(text))


def _canonical_key(key):
    key = key.strip().replace('-', '_')
    if key not in _PARSERS:
        lowered = {name.lower(): name for name in _PARSERS}
        key = lowered.get(key.lower(), key)
    if key not in _PARSERS:
        raise ConfigurationError('Unknown configuration key ' + repr(key))
    return key


def load_config_file(path):
    """
    Read key=value lines; blank lines and lines starting with # are skipped

    :raises ConfigurationError: unreadable file, malformed line or unknown key
    """
    values = {}
    try:
        with open(path) as stream:
            lines = stream.readlines()
    except OSError as e:
        raise ConfigurationError('Cannot read configuration file ' + repr(path) + ': ' + str(e))
    for number, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        if '=' not in line:
            raise ConfigurationError('{}:{}: expected key=value'.format(path, number))
        key, value = line.split('=', 1)
        values[_canonical_key(key)] = value.strip()
    return values


def build_run_config(file_values=None, flag_values=None):
    """
    Merge configuration sources; flags override the file, which overrides the defaults

    Flag values that are None are treated as not given. Strings are parsed, other values used as is.
    """
    merged = {}
    for source in (file_values or {}, flag_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            key = _canonical_key(key)
            merged[key] = _PARSERS[key](value) if isinstance(value, str) and key not in ('lattice', 'out') else value
    if 'k_range' in merged:
        merged['k_range'] = tuple(merged['k_range'])
    if 'H_grid' in merged:
        merged['H_grid'] = tuple(merged['H_grid'])
    return replace(RunConfig(), **merged)
