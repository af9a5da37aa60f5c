"""Exception types and input validation helpers shared across the package."""

import numbers

import numpy as np


class WursimError(Exception):
    """Base class for all errors raised by wursim."""


class DimensionError(WursimError, ValueError):
    pass


class LengthError(WursimError, ValueError):
    pass


class ConfigError(WursimError, ValueError):
    pass


class ParameterError(WursimError, ValueError):
    pass


class InfeasibleRateError(ConfigError):
    """The WUS band cannot carry the requested number of OOK segments."""


class CapacityError(ConfigError):
    """The payload space exceeds the sequence codebook."""


class SeedError(ParameterError):
    pass


class InsufficientDataError(ParameterError):
    pass


class BracketError(WursimError, RuntimeError):
    """A search target is not reachable within the given bounds."""


class SaturationError(WursimError, ValueError):
    """An overhead fraction exceeds one, i.e. the configuration is infeasible."""


class ScheduleConflictError(WursimError, ValueError):
    pass


def check_complex_array(x, name="x", ndim=None, allow_empty=False):
    """Return ``x`` as a complex128 array after checking shape and finiteness.

    ``sklearn.utils.check_array`` rejects complex input, hence this helper.
    """
    arr = np.asarray(x)
    if arr.dtype.kind not in "biufc":
        raise ParameterError(f"{name} must be numeric, got dtype {arr.dtype}")
    arr = arr.astype(np.complex128, copy=False)
    if ndim is not None and arr.ndim not in np.atleast_1d(ndim):
        raise DimensionError(f"{name} must have ndim in {ndim}, got {arr.ndim}")
    if not allow_empty and arr.size == 0:
        raise LengthError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


def check_probability(p, name, open_interval=False):
    if not isinstance(p, numbers.Real) or np.isnan(p):
        raise ParameterError(f"{name} must be a real number, got {p!r}")
    if open_interval:
        if not 0.0 < p < 1.0:
            raise ParameterError(f"{name} must lie in (0, 1), got {p}")
    elif not 0.0 <= p <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {p}")
    return float(p)


def check_positive_int(n, name, minimum=1):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {n!r}")
    if n < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {n}")
    return int(n)


def make_rng(seed, *stream):
    """Independent generator for ``(seed, *stream)``; streams never overlap."""
    if seed is None:
        raise SeedError("a seed is required for reproducible stochastic operations")
    head = list(seed) if isinstance(seed, (tuple, list)) else [seed]
    return np.random.default_rng(np.random.SeedSequence([*map(int, head), *map(int, stream)]))
