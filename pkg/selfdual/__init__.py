import sys

__all__ = ['cached', 'suppress_warnings', 'Phase', 'SectionSource',
           'make_lattice', 'make_grid', 'eval_u0', 'eval_u_h', 'build_pair', 'continuation_sweep',
           'energy_internal', 'energy_total', 'classify']

if sys.version_info < (3, 8):
    sys.stderr.write('selfdual requires python 3.8 or newer.\n')
    raise ImportError('Unsupported python version')

from . import selfdual as _selfdual

cached = _selfdual.cached
suppress_warnings = _selfdual.suppress_warnings
__version__ = _selfdual.__version__

from .constant.flag import Phase, SectionSource
from .lattice.geometry import make_lattice, make_grid
from .landau.groundstate import eval_u0, eval_u_h
from .solver.bogomolny import build_pair, continuation_sweep
from .energetics import energy_internal, energy_total
from .phase_diagram import classify
