from collections import namedtuple


__all__ = ['DummyWithable', 'HashedList', 'CacheInfo',
           'EnergyReport', 'SolveDiagnostics', 'SweepResult', 'SlopeEstimate', 'Bound', 'HkValue',
           'PhasePoint', 'ZeroLocation', 'CheckResult', 'SectionSample', 'DiagramRow', 'SlopeCheck']


class DummyWithable(object):
    """
    This class is used to create instances that can bypass "with" statements

    e.g.
    lock = DummyWithable()
    with lock:
        solve()
    """

    __slots__ = ()

    def __enter__(self):
        pass

    def __exit__(self, exc_type, exc_val, exc_tb):
        pass


class HashedList(list):
    """
    A cache key whose hash is computed once, however many times the cache looks it up.
    """

    __slots__ = ('hash_value', )

    def __init__(self, tup, hash_value):
        super().__init__(tup)
        self.hash_value = hash_value

    def __hash__(self):
        return self.hash_value


# Statistics of a cached numerical builder; seconds_saved sums the build time of every hit
CacheInfo = namedtuple('CacheInfo', ['hits', 'misses', 'current_size', 'max_size', 'thread_safe',
                                     'seconds_saved'])

# Decomposed energy of a pair (u, a); every term is a quadrature over the unit-area cell
EnergyReport = namedtuple('EnergyReport', ['kinetic', 'potential', 'field', 'internal', 'magnetic_gap',
                                           'total', 'a_plus', 'bkn_defect'])

# Newton history of one Kazdan-Warner solve
SolveDiagnostics = namedtuple('SolveDiagnostics', ['converged', 'iterations', 'residual_history',
                                                   'linear_iterations', 'damped_steps'])

# Completed prefix of a continuation sweep and the error that stopped it (None when complete)
SweepResult = namedtuple('SweepResult', ['pairs', 'failure'])

# Slope constant of the lower critical field at the self-dual point
SlopeEstimate = namedtuple('SlopeEstimate', ['grid_sup', 'extrapolated', 'chis'])

# A one-sided bound together with the quasimode achieving it (None for the trivial pair)
Bound = namedtuple('Bound', ['value', 'witness'])

# Value of the quasimode functional; H_int_opt is None when the potential integral vanishes
HkValue = namedtuple('HkValue', ['value', 'H_int_opt', 'degenerate'])

PhasePoint = namedtuple('PhasePoint', ['k', 'H_ext', 'phase', 'hc1_lower', 'hc1_upper', 'hc2', 'witness'])

ZeroLocation = namedtuple('ZeroLocation', ['point', 'winding'])

# One entry of the verification battery
CheckResult = namedtuple('CheckResult', ['name', 'passed', 'value', 'threshold'])

# Pointwise values of a section and its analytic derivatives
SectionSample = namedtuple('SectionSample', ['values', 'grad_x', 'grad_y', 'laplacian'])

# One row of the emitted phase diagram
DiagramRow = namedtuple('DiagramRow', ['k', 'hc1_lower', 'hc1_upper', 'hc2'])

# Upper bound of the lower critical field at k = 1/sqrt(2) + h against its proven sandwich
SlopeCheck = namedtuple('SlopeCheck', ['h', 'offset', 'lower', 'upper', 'passed'])
