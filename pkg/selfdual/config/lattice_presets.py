import math

from selfdual.errors import ConfigurationError
from selfdual.lattice.geometry import make_lattice

_HEX_U = math.sqrt(2.0 / math.sqrt(3.0))

# name -> canonical (u, w)
LATTICE_PRESETS = {
    'square': (1.0, 0.0),
    'hex': (_HEX_U, _HEX_U / 2.0),
}


def get_lattice_preset(name='square'):
    try:
        u, w = LATTICE_PRESETS[name]
    except KeyError:
        raise ConfigurationError('Unrecognized lattice preset ' + repr(name) +
                                 ', expected one of ' + ', '.join(sorted(LATTICE_PRESETS)))
    return make_lattice(u, w)
