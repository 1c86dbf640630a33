"""Input validation helpers used by the public functions and estimators."""
from __future__ import annotations

import math
from numbers import Integral

import numpy as np

from .exceptions import ConfigurationError, DomainError


def check_series(y, min_length: int = 4, name: str = "y") -> np.ndarray:
    """Return ``y`` as a finite 1-D float array of length >= ``min_length``."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"{name} needs at least {min_length} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_batch(Y, name: str = "Y") -> np.ndarray:
    """Return ``Y`` as a finite 2-D float array (replicates x time)."""
    arr = np.asarray(Y, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (replicates, n), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_points(t, name: str = "t") -> np.ndarray:
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


def check_int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def floor_log2(n: int) -> int:
    return int(math.floor(math.log2(n) + 1e-12))


def design_points(n: int) -> np.ndarray:
    """Equispaced design t_i = i / n, i = 1..n."""
    return np.arange(1, n + 1, dtype=float) / n


def check_design(X, n: int | None = None) -> int:
    """Check that ``X`` is the equispaced design ``i / n`` and return ``n``.

    ``X`` may be ``None`` (design implied by ``n``), a 1-D array or an
    ``(n, 1)`` column as produced by sklearn pipelines.
    """
    if X is None:
        if n is None:
            raise ValueError("either X or n must be given")
        return n
    t = check_points(X, "X")
    m = t.size
    if n is not None and m != n:
        raise ValueError(f"X has {m} rows but y has {n} values")
    if not np.allclose(t, design_points(m), rtol=0, atol=1e-9):
        raise ValueError("X must be the equispaced design t_i = i/n, i = 1..n")
    return m
