"""
Special functions.
Bessel functions of the first kind (Miller backward recurrence), the zeros and
first minimum of J_0, and the standard Gaussian tail Psi.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy.optimize import bisect
from scipy.special import erfc

from src.core.exceptions import OutOfDomainError

logger = logging.getLogger(__name__)

MAX_ARGUMENT = 100.0
MAX_ORDER = 200

# Below this argument the two-term power series is exact to double precision.
_SERIES_CUTOFF = 1e-6
_RESCALE_LIMIT = 1e200
_ROOT_SCAN_STEP = 0.01
_ROOT_XTOL = 1e-12

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class BesselRow:
    """J_0(x) ... J_{n_max}(x) for one argument (negative orders follow from J_{-n} = (-1)^n J_n)."""

    x: float
    values: np.ndarray
    n_max: int

    def __post_init__(self):
        self.values.setflags(write=False)

    def __getitem__(self, n: int) -> float:
        if n < 0:
            return (-1) ** (-n) * float(self.values[-n])
        return float(self.values[n])


def _check_domain(x: np.ndarray, n_max: int):
    if n_max < 0:
        raise OutOfDomainError(f"n_max must be >= 0, got {n_max}")
    if np.any(x < 0) or np.any(~np.isfinite(x)):
        raise OutOfDomainError("Bessel argument must be finite and >= 0")
    if n_max > MAX_ORDER or (x.size and x.max() > MAX_ARGUMENT):
        raise OutOfDomainError(
            f"out of validated domain: need x <= {MAX_ARGUMENT:g} and n_max <= {MAX_ORDER}"
        )


def _small_argument_series(x: np.ndarray, n_max: int) -> np.ndarray:
    half = x / 2.0
    out = np.empty((x.size, n_max + 1))
    term = np.ones_like(x)
    for n in range(n_max + 1):
        if n > 0:
            term = term * half / n
        out[:, n] = term * (1.0 - half * half / (n + 1))
    return out


def _miller(x: np.ndarray, n_max: int) -> np.ndarray:
    m = max(n_max, int(math.ceil(x.max())))
    n_start = m + int(math.ceil(15 + 2 * math.sqrt(m)))

    rows = np.zeros((n_max + 1, x.size))
    j_next = np.zeros_like(x)
    j_cur = np.ones_like(x)
    norm = 2.0 * j_cur if n_start % 2 == 0 else np.zeros_like(x)

    for n in range(n_start, 0, -1):
        j_prev = (2.0 * n / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        k = n - 1
        if k <= n_max:
            rows[k] = j_cur
        if k == 0:
            norm = norm + j_cur
        elif k % 2 == 0:
            norm = norm + 2.0 * j_cur

        big = np.abs(j_cur) > _RESCALE_LIMIT
        if big.any():
            scale = 1.0 / _RESCALE_LIMIT
            j_cur[big] *= scale
            j_next[big] *= scale
            norm[big] *= scale
            rows[:, big] *= scale

    return (rows / norm).T


def bessel_j_table(x: ArrayLike, n_max: int) -> np.ndarray:
    """
    Evaluate J_0 ... J_{n_max} on an array of arguments.

    Args:
        x: Arguments, 0 <= x <= 100
        n_max: Highest order, 0 <= n_max <= 200

    Returns:
        Array of shape (len(x), n_max + 1)
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    _check_domain(x, n_max)

    out = np.zeros((x.size, n_max + 1))
    tiny = x < _SERIES_CUTOFF
    if tiny.any():
        out[tiny] = _small_argument_series(x[tiny], n_max)
    if (~tiny).any():
        out[~tiny] = _miller(x[~tiny], n_max)
    return out


def bessel_j_row(x: float, n_max: int) -> BesselRow:
    """
    Evaluate J_0(x) ... J_{n_max}(x).

    Args:
        x: Argument, 0 <= x <= 100
        n_max: Highest order, 0 <= n_max <= 200

    Returns:
        BesselRow holding the values
    """
    values = bessel_j_table(float(x), n_max)[0].copy()
    return BesselRow(x=float(x), values=values, n_max=n_max)


def bessel_j0(x: ArrayLike) -> ArrayLike:
    """J_0 on a scalar or an array."""
    values = bessel_j_table(x, 0)[:, 0]
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def bessel_j1(x: ArrayLike) -> ArrayLike:
    """J_1 on a scalar or an array."""
    values = bessel_j_table(x, 1)[:, 1]
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def _bracketed_roots(func, k: int, upper: float) -> Tuple[float, ...]:
    grid = np.arange(_ROOT_SCAN_STEP, upper + _ROOT_SCAN_STEP, _ROOT_SCAN_STEP)
    grid = grid[grid <= MAX_ARGUMENT]
    values = func(grid)
    roots = []
    for i in np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0):
        a, b = float(grid[i]), float(grid[i + 1])
        if values[i] == 0.0:
            roots.append(a)
        elif values[i + 1] != 0.0:
            roots.append(bisect(lambda t: float(func(t)), a, b, xtol=_ROOT_XTOL))
        if len(roots) == k:
            break
    return tuple(roots)


@lru_cache(maxsize=None)
def _j0_roots_cached(k: int) -> Tuple[float, ...]:
    # zeros of J_0 sit near (j - 1/4) * pi
    upper = min((k + 1) * math.pi, MAX_ARGUMENT)
    roots = _bracketed_roots(bessel_j0, k, upper)
    if len(roots) < k:
        raise OutOfDomainError(f"only {len(roots)} zeros of J_0 lie in the validated domain")
    logger.debug("Computed %d zeros of J_0", k)
    return roots


def j0_roots(k: int) -> Tuple[float, ...]:
    """
    First k positive zeros of J_0.

    Args:
        k: Number of zeros, k >= 1

    Returns:
        Strictly increasing tuple of zeros
    """
    if k < 1:
        raise OutOfDomainError(f"k must be >= 1, got {k}")
    return _j0_roots_cached(int(k))


@lru_cache(maxsize=1)
def j0_first_min() -> float:
    """Location of the first local minimum of J_0 (the zero of J_1 between r_1 and r_2)."""
    r1, r2 = j0_roots(2)
    return bisect(lambda t: bessel_j1(t), r1, r2, xtol=_ROOT_XTOL)


def gaussian_tail(t: ArrayLike) -> ArrayLike:
    """
    Standard Gaussian tail Psi(t) = P[xi >= t].

    Args:
        t: Threshold(s)

    Returns:
        Psi(t), same shape as t
    """
    value = 0.5 * erfc(np.asarray(t, dtype=float) / math.sqrt(2.0))
    return float(value) if np.ndim(value) == 0 else value
