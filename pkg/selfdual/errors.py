__all__ = ['SelfDualError', 'DomainError', 'ConfigurationError', 'ContractError', 'SolverError',
           'IntegrityError']


class SelfDualError(Exception):
    """Base class of every error raised by selfdual"""


class DomainError(SelfDualError, ValueError):
    """A parameter lies outside the mathematical domain of the operation"""


class ConfigurationError(SelfDualError, ValueError):
    """A discretization or run setting is unusable"""


class ContractError(SelfDualError, TypeError):
    """Inputs are individually valid but cannot be combined (mismatched grids, unknown provenance)"""


class SolverError(SelfDualError, RuntimeError):
    """
    The Newton iteration did not reach its tolerance

    residual_history holds the max-norm residual after every iteration, initial guess first.
    """

    def __init__(self, message, residual_history=(), H_int=None):
        super().__init__(message)
        self.residual_history = tuple(float(r) for r in residual_history)
        self.H_int = H_int

    def to_dict(self):
        return {'error': 'solver', 'message': str(self), 'H_int': self.H_int,
                'residual_history': list(self.residual_history)}


class IntegrityError(SelfDualError, RuntimeError):
    """A computed object violates an identity it must satisfy"""

    def __init__(self, message, check=None, value=None):
        super().__init__(message)
        self.check = check
        self.value = value

    def to_dict(self):
        return {'error': 'integrity', 'message': str(self), 'check': self.check,
                'value': None if self.value is None else float(self.value)}
