from selfdual.model import HashedList


def make_key(args, kwargs, kwargs_mark=(object(), )):
    """
    Make a cache key from the arguments of a numerical builder

    Returns None when an argument is unhashable (a raw ndarray, a list of samples); such calls
    bypass the cache, since a textual key would alias arrays whose repr is abbreviated.
    """
    key = args
    if kwargs:
        key += kwargs_mark
        for item in sorted(kwargs.items()):
            key += item
    try:
        hash_value = hash(key)
    except TypeError:
        return None
    else:
        return HashedList(key, hash_value)
