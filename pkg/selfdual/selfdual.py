from functools import partial, update_wrapper
import inspect
import warnings

import selfdual.caching.statistic_cache as statistic_cache
import selfdual.caching.lru_cache as lru_cache


# Public symbols
__all__ = ['cached', 'suppress_warnings', 'warnings_enabled', 'warn',
           'SelfDualWarning', 'RefinementWarning', 'ConvergenceWarning']
__version__ = '0.3.0'

# Whether warnings are enabled
_warning_enabled = True


class SelfDualWarning(UserWarning):
    """Base category of every warning issued by selfdual"""


class RefinementWarning(SelfDualWarning):
    """Quadrature values drift between a grid and its refinement"""


class ConvergenceWarning(SelfDualWarning):
    """An inner iteration stopped before reaching its tolerance"""


def cached(user_function=None, max_size=None, thread_safe=True):
    """
    @cached decorator wrapper for expensive numerical constructions (grids, theta samples, solved pairs)

    :param user_function:   The decorated function, to be cached.

    :param max_size:        The max number of results that can be held in the cache.
                            - None: unbounded
                            - 0: nothing is stored, only calls are counted
                            - n > 0: least recently used results are evicted first

    :param thread_safe:     Whether the cache is thread safe.
                            Sweeps run with --jobs > 1 share the caches, so this defaults to True.

    Arguments form the key. Frozen value types (Lattice, ThetaParams, SolverConfig, floats, tuples)
    compare by value; grids and fields are compared by identity, which is why make_grid is itself
    cached: the same (lattice, n) always yields the same Grid object.

    Cached results must not be mutated; the numerical builders flag their arrays read-only.

    :return: decorator function
    """

    # Adapt to the usage of calling the decorator and that of not calling it
    # i.e. @cached and @cached()
    if user_function is None:
        return partial(cached, max_size=max_size, thread_safe=thread_safe)

    # Perform type checking
    if not hasattr(user_function, '__call__'):
        raise TypeError('Unable to cache non-callable object ' + str(user_function))
    if max_size is not None:
        if not isinstance(max_size, int):
            raise TypeError('Expected max_size to be an integer or None')
        elif max_size < 0:
            raise ValueError('Expected max_size to be a nonnegative integer or None')
    if not isinstance(thread_safe, bool):
        raise TypeError('Expected thread_safe to be a boolean value')

    if max_size == 0:
        wrapper = statistic_cache.get_caching_wrapper(user_function, max_size, thread_safe)
    else:
        wrapper = lru_cache.get_caching_wrapper(user_function, max_size, thread_safe)
    wrapper.__signature__ = inspect.signature(user_function)  # copy the signature of user_function to the wrapper
    return update_wrapper(wrapper, user_function)  # update wrapper to make it look like the original function


def suppress_warnings(should_warn=False):
    """
    Disable/Enable the warnings issued by selfdual (refinement drift, inner solver stagnation)

    :param should_warn: Whether warnings should be shown (False by default)
    """
    global _warning_enabled
    _warning_enabled = should_warn


def warnings_enabled():
    """Whether selfdual currently issues its warnings"""
    return _warning_enabled


def warn(message, category=SelfDualWarning):
    """Issue a selfdual warning unless suppress_warnings() was called"""
    if _warning_enabled:
        warnings.warn(message, category, stacklevel=3)


if __name__ == '__main__':
    import sys
    sys.stderr.write('selfdual v' + __version__ +
                     ': exact self-dual Ginzburg-Landau vortex lattices and critical field bounds.\n')
    sys.stderr.write('Run python -m selfdual --help for the command line.\n')
