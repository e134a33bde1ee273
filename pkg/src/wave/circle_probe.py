"""
Circle probe.
Traces the field on circles, counts crossings of the circle process
u(theta) = X_0 J_0(r) - f(r cos theta, r sin theta), detects the event that f
does not vanish on the circle, and provides the Kac-Rice expectation.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from src.core.exceptions import OutOfDomainError
from src.wave.field_sampler import (
    SQRT2,
    CoefficientBatch,
    Point,
    WaveCoefficients,
    evaluate_batch,
    evaluate_cartesian,
)
from src.wave.special_functions import bessel_j0, bessel_j_row

logger = logging.getLogger(__name__)

SAMPLES_PER_UNIT_RADIUS = 64
ANGLE_TOLERANCE = 1e-8


def min_samples(r: float) -> int:
    """Smallest admissible number of angles on a circle of radius r."""
    return int(math.ceil(SAMPLES_PER_UNIT_RADIUS * r))


def circle_angles(m: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(m) / m


@dataclass(frozen=True)
class CircleTrace:
    """Field values at m equally spaced angles on a circle."""

    center: Point
    r: float
    m: int
    values: np.ndarray
    u_values: Optional[np.ndarray]
    coeffs: WaveCoefficients

    @property
    def angles(self) -> np.ndarray:
        return circle_angles(self.m)

    @property
    def is_centred(self) -> bool:
        return self.center[0] == 0.0 and self.center[1] == 0.0


@dataclass(frozen=True)
class NoZeroVerdict:
    """Outcome of the two-pass no-zero check; ``flagged`` when the passes disagree."""

    no_zero: bool
    flagged: bool


@dataclass(frozen=True)
class CrossingReport:
    """Crossings of u(theta) through a level."""

    level: float
    count: int
    refined_angles: Tuple[float, ...]
    suspicious: bool


def _check_circle(r: float, m: int):
    if r <= 0:
        raise OutOfDomainError("circle radius must be positive")
    if m < min_samples(r):
        raise OutOfDomainError(f"m = {m} is below the sampling floor ceil(64 r) = {min_samples(r)}")


def trace(coeffs: WaveCoefficients, center: Point = (0.0, 0.0), r: float = 1.0,
          m: Optional[int] = None) -> CircleTrace:
    """
    Sample a field on the circle of radius r around center.

    Args:
        coeffs: Sample coefficients
        center: Circle centre (Cartesian)
        r: Circle radius
        m: Number of angles (default ceil(64 r))

    Returns:
        CircleTrace; u_values is set only for circles centred at the origin
    """
    m = min_samples(r) if m is None else int(m)
    _check_circle(r, m)
    theta = circle_angles(m)
    x = center[0] + r * np.cos(theta)
    y = center[1] + r * np.sin(theta)
    values = evaluate_cartesian(coeffs, x, y)

    u_values = None
    if center[0] == 0.0 and center[1] == 0.0:
        u_values = coeffs.x0 * bessel_j0(r) - values
    return CircleTrace(center=(float(center[0]), float(center[1])), r=float(r), m=m,
                       values=values, u_values=u_values, coeffs=coeffs)


def _u_function(tr: CircleTrace):
    row = bessel_j_row(tr.r, tr.coeffs.n_trunc).values
    n = np.arange(1, tr.coeffs.n_trunc + 1)
    weights_x = SQRT2 * row[1:] * tr.coeffs.xs
    weights_y = SQRT2 * row[1:] * tr.coeffs.ys

    def u(theta: float) -> float:
        return float(np.dot(weights_x, np.cos(n * theta)) + np.dot(weights_y, np.sin(n * theta)))

    return u


def _sign_change_brackets(diff: np.ndarray) -> list:
    """Cyclic brackets (i, j) of consecutive non-zero samples with opposite signs."""
    nonzero = np.flatnonzero(diff != 0.0)
    if nonzero.size < 2:
        return []
    signs = np.sign(diff[nonzero])
    following = np.roll(nonzero, -1)
    changes = np.flatnonzero(signs != np.roll(signs, -1))
    return [(int(nonzero[c]), int(following[c])) for c in changes]


def count_crossings(tr: CircleTrace, level: float) -> CrossingReport:
    """
    Count the crossings of u(theta) through level and locate them.

    Exact zeros at sample angles are merged with their neighbours, so a touch
    counts zero times and a zero between opposite signs counts once.

    Args:
        tr: Origin-centred circle trace
        level: Crossing level

    Returns:
        CrossingReport with angles refined to 1e-8 by bisection on u
    """
    if tr.u_values is None:
        raise OutOfDomainError("crossings of u are defined for circles centred at the origin")

    diff = tr.u_values - level
    brackets = _sign_change_brackets(diff)
    if not brackets:
        return CrossingReport(level=float(level), count=0, refined_angles=(), suspicious=False)

    u = _u_function(tr)
    step = 2.0 * math.pi / tr.m
    angles = []
    for i, j in brackets:
        lo = i * step
        hi = j * step if j > i else j * step + 2.0 * math.pi
        try:
            root = bisect(lambda t: u(t) - level, lo, hi, xtol=ANGLE_TOLERANCE)
        except ValueError:
            # the sampled and the continuous u disagree in the last bits at a bracket end
            root = lo if abs(diff[i]) < abs(diff[j]) else hi
        angles.append(root % (2.0 * math.pi))
    angles.sort()

    gaps = np.diff(np.append(angles, angles[0] + 2.0 * math.pi))
    suspicious = bool(len(angles) > 1 and np.any(gaps < 2.0 * step))
    if suspicious:
        logger.warning("Crossings closer than the sampling scale (r=%.4g, m=%d, seed=%d)",
                       tr.r, tr.m, tr.coeffs.seed)
    return CrossingReport(level=float(level), count=len(angles),
                          refined_angles=tuple(angles), suspicious=suspicious)


def kac_rice_expected_crossings(r: float, x0: float) -> float:
    """
    Expected number of crossings of u through x0 J_0(r) given X_0 = x0.

    (sqrt(2) r / alpha(r)) * exp(-x0^2 J_0(r)^2 / (2 alpha(r)^2)), alpha(r)^2 = 1 - J_0(r)^2.

    Args:
        r: Circle radius, > 0
        x0: Conditioned value of X_0

    Returns:
        Expected crossing count
    """
    if r <= 0:
        raise OutOfDomainError("Kac-Rice expectation needs r > 0")
    j0 = bessel_j0(r)
    alpha_sq = 1.0 - j0 * j0
    if alpha_sq <= 0:
        raise OutOfDomainError(f"alpha(r) vanishes at r = {r}")
    return SQRT2 * r / math.sqrt(alpha_sq) * math.exp(-(x0 * j0) ** 2 / (2.0 * alpha_sq))


def _strict_sign(values: np.ndarray) -> int:
    if np.all(values > 0):
        return 1
    if np.all(values < 0):
        return -1
    return 0


def check_no_zero(tr: CircleTrace) -> NoZeroVerdict:
    """
    Two-pass no-zero check on the traced circle.

    The verdict is confirmed by a second pass at 2m angles; when the passes
    disagree the refined verdict wins and the sample is flagged.

    Args:
        tr: Circle trace (any centre)

    Returns:
        NoZeroVerdict
    """
    first = _strict_sign(tr.values) != 0
    refined_trace = trace(tr.coeffs, tr.center, tr.r, 2 * tr.m)
    refined = _strict_sign(refined_trace.values) != 0
    if first != refined:
        logger.warning("Refinement pass changed the no-zero verdict (r=%.4g, m=%d, seed=%d)",
                       tr.r, tr.m, tr.coeffs.seed)
    return NoZeroVerdict(no_zero=refined, flagged=first != refined)


def event_no_zero(tr: CircleTrace) -> bool:
    """Whether the field keeps one strict sign on the traced circle (refined verdict)."""
    return check_no_zero(tr).no_zero


# --- ensemble variants -------------------------------------------------------

def batch_circle_values(batch: CoefficientBatch, r: float, m: int) -> np.ndarray:
    """Field values on the origin-centred circle for every sample, shape (S, m)."""
    _check_circle(r, m)
    theta = circle_angles(m)
    return evaluate_batch(batch, np.full(m, float(r)), theta)


def batch_crossing_counts(batch: CoefficientBatch, r: float, m: int,
                          levels: np.ndarray) -> np.ndarray:
    """
    Crossing counts of u through a per-sample level.

    Args:
        batch: Stacked coefficients
        r: Circle radius
        m: Number of angles
        levels: One level per sample

    Returns:
        Integer counts, one per sample
    """
    values = batch_circle_values(batch, r, m)
    u = batch.x0[:, None] * bessel_j0(r) - values
    diff = u - np.asarray(levels, dtype=float)[:, None]

    counts = np.count_nonzero(np.sign(diff) != np.sign(np.roll(diff, -1, axis=1)), axis=1)
    # rows with exact zeros go through the tie-aware scalar rule
    for row in np.flatnonzero(np.any(diff == 0.0, axis=1)):
        counts[row] = len(_sign_change_brackets(diff[row]))
    return counts


def batch_check_no_zero(batch: CoefficientBatch, r: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    No-zero check for every sample, using the same two passes as check_no_zero.

    Args:
        batch: Stacked coefficients
        r: Circle radius
        m: Number of angles of the first pass

    Returns:
        (refined verdicts, flags of the samples whose passes disagree)
    """
    values = batch_circle_values(batch, r, 2 * m)
    # the even angles of the 2m pass are exactly the m-pass angles
    coarse = values[:, ::2]
    first = np.all(coarse > 0, axis=1) | np.all(coarse < 0, axis=1)
    refined = np.all(values > 0, axis=1) | np.all(values < 0, axis=1)
    flagged = first != refined
    if flagged.any():
        logger.warning("Refinement pass changed %d of %d no-zero verdicts at r=%.4g",
                       int(np.count_nonzero(flagged)), len(batch), r)
    return refined, flagged
