from threading import RLock
import time

from selfdual.model import DummyWithable, CacheInfo
from selfdual.caching.general.keys import make_key


def _split_arguments(function_arguments):
    """Normalize a tuple, a dict or an [args, kwargs] list into (args, kwargs)"""
    if isinstance(function_arguments, tuple):
        return function_arguments, {}
    elif isinstance(function_arguments, dict):
        return (), function_arguments
    elif isinstance(function_arguments, list) and len(function_arguments) == 2:
        positional_argument_tuple, keyword_argument_dict = function_arguments
        if not isinstance(positional_argument_tuple, tuple) or not isinstance(keyword_argument_dict, dict):
            raise TypeError('Expected function_arguments to be a list containing a positional argument tuple '
                            'and a keyword argument dict')
        return positional_argument_tuple, keyword_argument_dict
    raise TypeError('Expected function_arguments to be a tuple, a dict, or a list with 2 elements')


def get_caching_wrapper(user_function, max_size, thread_safe):
    """
    Get a least-recently-used caching wrapper for a numerical builder

    max_size=None keeps every result. Each entry remembers how long its build took, and every hit
    adds that duration to cache_info().seconds_saved.
    """

    cache = {}                                                  # key -> linked list node
    key_argument_map = {}                                       # key -> (args, kwargs) of the build
    sentinel = object()                                         # sentinel object for the default value of map.get
    hits = misses = 0
    seconds_saved = 0.0
    lock = RLock() if thread_safe else DummyWithable()          # ensure thread-safe
    clock = time.perf_counter

    # for LRU list
    full = False                                                # whether the cache is full or not
    root = []                                                   # linked list
    root[:] = [root, root, None, None, 0.0]                     # initialize by pointing to self
    _PREV = 0                                                   # index for the previous node
    _NEXT = 1                                                   # index for the next node
    _KEY = 2                                                    # index for the key
    _VALUE = 3                                                  # index for the built result
    _COST = 4                                                   # index for the build duration

    def wrapper(*args, **kwargs):
        """The actual wrapper"""
        nonlocal hits, misses, seconds_saved, root, full
        key = make_key(args, kwargs)
        if key is None:
            with lock:
                misses += 1
            return user_function(*args, **kwargs)
        with lock:
            node = cache.get(key, sentinel)
            if node is not sentinel:
                # move the node to the front of the list
                node_prev, node_next = node[_PREV], node[_NEXT]
                node_prev[_NEXT] = node_next
                node_next[_PREV] = node_prev
                node[_PREV] = root[_PREV]
                node[_NEXT] = root
                root[_PREV][_NEXT] = node
                root[_PREV] = node
                hits += 1
                seconds_saved += node[_COST]
                return node[_VALUE]
            misses += 1
        start = clock()
        result = user_function(*args, **kwargs)
        cost = clock() - start
        with lock:
            if key in cache:
                # built concurrently while the lock was released
                pass
            elif full:
                # reuse the root as the new node and promote the oldest node to root
                old_root = root
                root = root[_NEXT]
                old_key = root[_KEY]
                old_value = root[_VALUE]  # noqa: F841, keeps the evicted result alive until unlinked
                old_root[_KEY] = key
                old_root[_VALUE] = result
                old_root[_COST] = cost
                root[_KEY] = root[_VALUE] = None
                root[_COST] = 0.0
                del cache[old_key]
                del key_argument_map[old_key]
                cache[key] = old_root
                key_argument_map[key] = (args, kwargs)
            else:
                last = root[_PREV]
                node = [last, root, key, result, cost]
                cache[key] = root[_PREV] = last[_NEXT] = node
                key_argument_map[key] = (args, kwargs)
                full = max_size is not None and len(cache) >= max_size
        return result

    def cache_clear():
        """Drop every stored result and reset the statistics"""
        nonlocal hits, misses, seconds_saved, full
        with lock:
            cache.clear()
            key_argument_map.clear()
            hits = misses = 0
            seconds_saved = 0.0
            full = False
            root[:] = [root, root, None, None, 0.0]

    def cache_info():
        """
        Show statistics information

        :return: a CacheInfo object describing the cache
        """
        with lock:
            return CacheInfo(hits, misses, len(cache), max_size, thread_safe, seconds_saved)

    def cache_is_empty():
        """Return True if the cache contains no elements"""
        return len(cache) == 0

    def cache_is_full():
        """Return True if the cache is full"""
        return full

    def cache_contains_argument(function_arguments):
        """
        Return True if a result built from the given arguments is stored

        :param function_arguments:  a tuple of positional arguments, a dict of keyword arguments, or a list
                                    [args_tuple, kwargs_dict]. For example build_pair(lat, grid, theta, 0.3, cfg)
                                    is looked up with (lat, grid, theta, 0.3, cfg).
        """
        positional_argument_tuple, keyword_argument_dict = _split_arguments(function_arguments)
        key = make_key(positional_argument_tuple, keyword_argument_dict)
        if key is None:
            return False
        with lock:
            return key in cache

    def cache_items():
        """
        Iterate over ((args, kwargs), result), most recently used first
        """
        with lock:
            node = root[_PREV]
            while node is not root:
                yield key_argument_map[node[_KEY]], node[_VALUE]
                node = node[_PREV]

    def cache_remove_if(predicate):
        """
        Remove all stored results for which predicate((args, kwargs), result) is True

        Used to release the fields of a lattice that is no longer swept.

        :return: True if at least one element is removed, False otherwise.
        """
        nonlocal full
        removed = False
        with lock:
            node = root[_PREV]
            while node is not root:
                if predicate(key_argument_map[node[_KEY]], node[_VALUE]):
                    removed = True
                    node_prev = node[_PREV]
                    node_prev[_NEXT] = node[_NEXT]
                    node[_NEXT][_PREV] = node_prev
                    key = node[_KEY]
                    node[_KEY] = node[_VALUE] = None
                    del cache[key]
                    del key_argument_map[key]
                    full = max_size is not None and len(cache) >= max_size
                    node = node_prev
                else:
                    node = node[_PREV]
        return removed

    # expose operations to wrapper
    wrapper.cache_clear = cache_clear
    wrapper.cache_info = cache_info
    wrapper.cache_is_empty = cache_is_empty
    wrapper.cache_is_full = cache_is_full
    wrapper.cache_contains_argument = cache_contains_argument
    wrapper.cache_items = cache_items
    wrapper.cache_remove_if = cache_remove_if
    wrapper._cache = cache
    wrapper._lru_root = root

    return wrapper
