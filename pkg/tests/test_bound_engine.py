"""Tests for the analytic lower bound on nu_BS."""
import math

import numpy as np
import pytest
from scipy import integrate, stats

from src.core.exceptions import OutOfDomainError
from src.wave import bound_engine
from src.wave.bound_engine import (
    BoundMode,
    alpha,
    circle_integrand,
    circle_prob_lower_bound,
    gaussian_expectation_identity,
    integrated_circle_bound,
    nu_lower_bound,
    optimize,
    paper_point,
    threshold_T,
)
from src.wave.special_functions import bessel_j0, j0_roots


def test_alpha():
    r1 = j0_roots(1)[0]
    assert alpha(r1) == pytest.approx(1.0, abs=1e-12)
    assert alpha(3.8) == pytest.approx(math.sqrt(1.0 - bessel_j0(3.8) ** 2))
    assert 0.91 < alpha(3.8) < 0.92
    with pytest.raises(OutOfDomainError):
        alpha(0.0)


@pytest.mark.parametrize("r, T", [(3.0, 2.5), (3.8, 3.35), (4.5, 3.0), (5.0, 4.0)])
def test_nu_bound_is_scaled_circle_bound(r, T):
    evaluation = nu_lower_bound(r, T)
    assert r * r * evaluation.nu_lb == pytest.approx(16.0 * evaluation.circle_prob_lb, rel=1e-12)
    assert evaluation.circle_prob_lb == pytest.approx(circle_prob_lower_bound(r, T), rel=1e-12)


def test_circle_bound_at_the_printed_point():
    value = circle_prob_lower_bound(3.8, 3.35)
    assert 1.2e-4 < value < 1.35e-4


@pytest.mark.parametrize("r, T", [(3.0, 2.5), (3.8, 3.35), (4.5, 3.0), (5.0, 4.0)])
def test_circle_bound_integrates_the_integrand(r, T):
    assert integrated_circle_bound(r, T) == pytest.approx(circle_prob_lower_bound(r, T), rel=1e-9, abs=1e-15)
    density = stats.norm.pdf
    tail, _ = integrate.quad(lambda x: circle_integrand(r, x) * density(x), T, np.inf, epsabs=1e-14, epsrel=1e-10)
    assert integrated_circle_bound(r, T) == pytest.approx(2.0 * tail, rel=1e-6, abs=1e-12)


def test_threshold_at_printed_radius():
    T = threshold_T(3.8)
    assert 3.33 < T < 3.35
    assert circle_integrand(3.8, T) == pytest.approx(0.0, abs=1e-12)
    assert circle_integrand(3.8, T + 0.1) > 0
    assert circle_integrand(3.8, T - 0.1) < 0
    assert circle_integrand(3.8, -(T + 0.1)) > 0


def test_threshold_zero_branch(monkeypatch):
    """When r / (sqrt(2) alpha) <= 1 the integrand is never negative."""
    monkeypatch.setattr(bound_engine, "alpha", lambda r: 10.0)
    assert threshold_T(3.8) == 0.0


def test_threshold_at_a_zero_of_j0():
    with pytest.raises(OutOfDomainError):
        threshold_T(j0_roots(1)[0])


def test_paper_mode_factors():
    evaluation = paper_point()
    assert evaluation.mode is BoundMode.PAPER
    assert evaluation.factors["area_factor"] == pytest.approx(2.216, abs=1e-12)
    assert evaluation.factors["scaled_threshold"] == pytest.approx(3.659, abs=1e-12)
    assert evaluation.factors["half_perimeter"] == pytest.approx(2.69, abs=1e-12)
    assert evaluation.nu_lb >= 1.39e-4
    assert evaluation.nu_lb < 1.45e-4


def test_exact_mode_dominates_paper_mode():
    exact = nu_lower_bound(3.8, 3.35, BoundMode.EXACT)
    paper = nu_lower_bound(3.8, 3.35, "paper")
    assert 1.39e-4 <= exact.nu_lb <= 1.6e-4
    assert exact.nu_lb >= paper.nu_lb
    assert exact.factors["area_factor"] == pytest.approx(32.0 / 3.8 ** 2)
    assert exact.psi_T == pytest.approx(stats.norm.sf(3.35), rel=1e-12)


def test_evaluation_serialises():
    data = paper_point().to_dict()
    assert data["mode"] == "paper"
    assert set(data["factors"]) == {"area_factor", "scaled_threshold", "half_perimeter"}


@pytest.mark.parametrize("r", [2.0, 5.6, 6.0])
def test_radius_outside_the_first_two_zeros(r):
    with pytest.raises(OutOfDomainError):
        nu_lower_bound(r, 3.0)


def test_negative_threshold_rejected():
    with pytest.raises(OutOfDomainError):
        nu_lower_bound(3.8, -0.1)


def test_large_threshold_is_tiny_but_positive():
    value = nu_lower_bound(3.8, 10.0).nu_lb
    assert 0.0 < value < 1e-20


def test_bound_in_t_peaks_at_the_threshold():
    """The bound rises up to threshold_T(r) and falls after it."""
    for r in (3.2, 3.8, 4.6):
        thr = threshold_T(r)
        ts = np.linspace(0.0, thr + 3.0, 601)
        values = np.array([nu_lower_bound(r, t).nu_lb for t in ts])
        signs = np.sign(np.diff(values))
        signs = signs[signs != 0]
        assert np.count_nonzero(signs[1:] != signs[:-1]) == 1
        assert abs(ts[int(np.argmax(values))] - thr) <= ts[1] - ts[0]


def test_optimum_dominates_the_printed_point():
    result = optimize()
    r1, r2 = j0_roots(2)
    assert r1 < result.r_star < r2
    assert result.T_star >= threshold_T(result.r_star) - 1e-9
    assert result.best.nu_lb >= nu_lower_bound(3.8, 3.35).nu_lb
    assert result.best.nu_lb >= nu_lower_bound(3.8, threshold_T(3.8)).nu_lb * (1 - 1e-9)
    assert result.best.nu_lb >= 1.39e-4


def test_optimize_is_deterministic():
    first = optimize(step=1e-2)
    second = optimize(step=1e-2)
    assert first == second
    assert first.to_dict()["best"]["mode"] == "exact"


@pytest.mark.parametrize("a, T", [(0.0, 0.5), (0.3, 1.2), (1.5, -0.4)])
def test_gaussian_expectation_identity(a, T):
    expected, _ = integrate.quad(lambda x: math.exp(-a * x * x) * stats.norm.pdf(x), T, np.inf)
    assert gaussian_expectation_identity(a, T) == pytest.approx(expected, rel=1e-8)


def test_gaussian_expectation_identity_domain():
    with pytest.raises(OutOfDomainError):
        gaussian_expectation_identity(-0.5, 1.0)


def test_radius_at_the_zeros_of_j0():
    for r in j0_roots(2):
        with pytest.raises(OutOfDomainError):
            nu_lower_bound(r, 3.0)
