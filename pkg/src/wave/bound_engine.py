"""
Bound engine.
Evaluates the analytic lower bound

    nu_BS >= (32 / r^2) * [Psi(T) - (r / sqrt(2)) * Psi(T / alpha(r))],   alpha(r) = sqrt(1 - J_0(r)^2)

for r between the first two zeros of J_0, and searches (r, T) for its maximum.
"""
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np

from src.core import config
from src.core.exceptions import OutOfDomainError
from src.wave.special_functions import bessel_j0, gaussian_tail, j0_roots

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
_J0_ZERO_TOLERANCE = 1e-9


class BoundMode(str, Enum):
    EXACT = "exact"
    PAPER = "paper"


@dataclass(frozen=True)
class BoundEvaluation:
    """Every factor of the lower bound at one (r, T)."""

    r: float
    T: float
    alpha: float
    j0_r: float
    psi_T: float
    psi_scaled: float
    circle_prob_lb: float
    nu_lb: float
    mode: BoundMode
    factors: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["mode"] = self.mode.value
        return data


@dataclass(frozen=True)
class OptimizationResult:
    r_star: float
    T_star: float
    best: BoundEvaluation

    def to_dict(self) -> Dict[str, Any]:
        return {"r_star": self.r_star, "T_star": self.T_star, "best": self.best.to_dict()}


def alpha(r: float) -> float:
    """
    Standard deviation of the circle process u(theta), sqrt(1 - J_0(r)^2).

    Args:
        r: Circle radius, > 0

    Returns:
        alpha(r) in (0, 1]
    """
    if r <= 0:
        raise OutOfDomainError("alpha(r) needs r > 0")
    j0 = bessel_j0(r)
    return math.sqrt(max(1.0 - j0 * j0, 0.0))


def circle_prob_lower_bound(r: float, T: float) -> float:
    """
    Lower bound 2 Psi(T) - sqrt(2) r Psi(T / alpha(r)) on the probability that
    f does not vanish on the circle of radius r. May be negative (vacuous).
    """
    a = alpha(r)
    return 2.0 * gaussian_tail(T) - SQRT2 * r * gaussian_tail(T / a)


def circle_integrand(r: float, x0: float) -> float:
    """1 - (r / (sqrt(2) alpha)) exp(-x0^2 J_0(r)^2 / (2 alpha^2)); its expectation over |X_0| >= T bounds P[E_r]."""
    a = alpha(r)
    j0 = bessel_j0(r)
    return 1.0 - r / (SQRT2 * a) * math.exp(-(x0 * j0) ** 2 / (2.0 * a * a))


def gaussian_expectation_identity(a: float, T: float) -> float:
    """E[exp(-a X^2) 1{X >= T}] = Psi(sqrt(1 + 2a) T) / sqrt(1 + 2a) for standard Gaussian X and a > -1/2."""
    if a <= -0.5:
        raise OutOfDomainError("need a > -1/2")
    s = math.sqrt(1.0 + 2.0 * a)
    return gaussian_tail(s * T) / s


def integrated_circle_bound(r: float, T: float) -> float:
    """
    E[circle_integrand(r, X_0) 1{|X_0| >= T}], integrated in closed form with
    gaussian_expectation_identity. Equals circle_prob_lower_bound(r, T).
    """
    a = alpha(r)
    j0 = bessel_j0(r)
    weight = gaussian_expectation_identity(j0 * j0 / (2.0 * a * a), T)
    return 2.0 * gaussian_tail(T) - SQRT2 * r / a * weight


def threshold_T(r: float) -> float:
    """
    Smallest T >= 0 making circle_integrand(r, x0) >= 0 for all |x0| >= T.

    T = (alpha / |J_0(r)|) * sqrt(2 ln(r / (sqrt(2) alpha))), or 0 when
    r / (sqrt(2) alpha) <= 1. The same T maximises the bound over T.

    Args:
        r: Circle radius, > 0

    Returns:
        Threshold T
    """
    a = alpha(r)
    ratio = r / (SQRT2 * a)
    if ratio <= 1.0:
        return 0.0
    j0 = abs(bessel_j0(r))
    if j0 < _J0_ZERO_TOLERANCE:
        raise OutOfDomainError(f"integrand cannot be made positive at r = {r} (J_0(r) = 0)")
    return a / j0 * math.sqrt(2.0 * math.log(ratio))


def _admissible_radius(r: float):
    r1, r2 = j0_roots(2)
    if not r1 < r < r2:
        raise OutOfDomainError(
            f"r = {r} must lie strictly between the first two zeros of J_0 ({r1:.6f}, {r2:.6f})"
        )


def _floor_to(value: float, digits: int) -> float:
    scale = 10 ** digits
    return math.floor(value * scale) / scale


def _ceil_to(value: float, digits: int) -> float:
    scale = 10 ** digits
    return math.ceil(value * scale) / scale


def nu_lower_bound(r: float, T: float, mode: BoundMode = BoundMode.EXACT) -> BoundEvaluation:
    """
    Lower bound on nu_BS at (r, T).

    Exact mode uses full-precision Psi and J_0. Paper mode rounds the three
    factors pessimistically to the printed precision (32/r^2 down to three
    decimals, T/alpha down to three decimals, r/sqrt(2) up to two decimals),
    which at (3.8, 3.35) gives the printed 2.216, 3.659 and 2.69.

    Args:
        r: Circle radius in (r_1, r_2)
        T: Threshold, >= 0
        mode: BoundMode.EXACT or BoundMode.PAPER

    Returns:
        BoundEvaluation
    """
    mode = BoundMode(mode)
    _admissible_radius(r)
    if T < 0:
        raise OutOfDomainError("T must be >= 0")

    j0 = bessel_j0(r)
    a = alpha(r)
    psi_T = gaussian_tail(T)
    area = 32.0 / (r * r)
    scaled = T / a
    half_perimeter = r / SQRT2

    if mode is BoundMode.PAPER:
        area = _floor_to(area, 3)
        scaled = _floor_to(scaled, 3)
        half_perimeter = _ceil_to(half_perimeter, 2)

    psi_scaled = gaussian_tail(scaled)
    nu_lb = area * (psi_T - half_perimeter * psi_scaled)
    circle_lb = 2.0 * psi_T - SQRT2 * r * psi_scaled

    return BoundEvaluation(
        r=float(r), T=float(T), alpha=a, j0_r=j0, psi_T=psi_T, psi_scaled=psi_scaled,
        circle_prob_lb=circle_lb, nu_lb=nu_lb, mode=mode,
        factors={"area_factor": area, "scaled_threshold": scaled, "half_perimeter": half_perimeter},
    )


def _scan(r_values: np.ndarray, t_offsets: np.ndarray, t_floor: np.ndarray) -> Tuple[int, int, float]:
    """Best (r index, T index, value) of the exact bound on a product grid, ties to smaller r then T."""
    j0 = bessel_j0(r_values)
    a = np.sqrt(1.0 - j0 * j0)
    T = t_floor[:, None] + t_offsets[None, :]
    values = (32.0 / r_values[:, None] ** 2) * (
        gaussian_tail(T) - (r_values[:, None] / SQRT2) * gaussian_tail(T / a[:, None])
    )
    flat = int(np.argmax(values))
    i, j = divmod(flat, values.shape[1])
    return i, j, float(values[i, j])


def optimize(step: float = 1e-3, t_span: float = 3.0, refinements: int = 2) -> OptimizationResult:
    """
    Maximise the exact bound over r in (r_1, r_2) and T >= threshold_T(r).

    A product grid (r step ``step``, T in [threshold_T(r), threshold_T(r) + t_span])
    is followed by ``refinements`` rounds of 10x finer local grids around the
    incumbent. Deterministic.

    Returns:
        OptimizationResult holding (r_star, T_star, best)
    """
    r1, r2 = j0_roots(2)
    r_values = np.arange(r1 + step, r2 - step + step / 2, step)
    t_floor = np.array([threshold_T(float(r)) for r in r_values])
    t_offsets = np.arange(0.0, t_span + step / 2, step)

    best_i, best_j, best_value = -1, -1, -np.inf
    chunk = 64
    for start in range(0, r_values.size, chunk):
        i, j, value = _scan(r_values[start:start + chunk], t_offsets, t_floor[start:start + chunk])
        if value > best_value:
            best_i, best_j, best_value = start + i, j, value
    r_star = float(r_values[best_i])
    T_star = float(t_floor[best_i] + t_offsets[best_j])
    logger.info("Coarse scan: r=%.4f T=%.4f nu_lb=%.6e", r_star, T_star, best_value)

    local_step = step
    for _ in range(refinements):
        local_step /= 10.0
        grid = np.arange(-10, 11) * local_step
        r_local = np.clip(r_star + grid, r1 + local_step, r2 - local_step)
        floors = np.array([threshold_T(float(r)) for r in r_local])
        # T grid around the incumbent, never below the threshold of each r
        t_local = T_star + grid
        T_grid = np.maximum(t_local[None, :], floors[:, None])
        a = np.array([alpha(float(r)) for r in r_local])
        values = (32.0 / r_local[:, None] ** 2) * (
            gaussian_tail(T_grid) - (r_local[:, None] / SQRT2) * gaussian_tail(T_grid / a[:, None])
        )
        flat = int(np.argmax(values))
        i, j = divmod(flat, values.shape[1])
        if values[i, j] > best_value:
            r_star, T_star, best_value = float(r_local[i]), float(T_grid[i, j]), float(values[i, j])
        logger.debug("Refinement step %.0e: r=%.6f T=%.6f nu_lb=%.6e", local_step, r_star, T_star, best_value)

    best = nu_lower_bound(r_star, T_star, BoundMode.EXACT)
    return OptimizationResult(r_star=r_star, T_star=T_star, best=best)


def paper_point() -> BoundEvaluation:
    """The printed evaluation at r = 3.8, T = 3.35."""
    return nu_lower_bound(config.PAPER_R, config.PAPER_T, BoundMode.PAPER)
