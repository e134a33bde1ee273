"""Tests for drawing and evaluating the random plane wave."""
import math

import numpy as np
import pytest
from scipy import special

from src.core.exceptions import GeometryError, OutOfDomainError
from src.wave.field_sampler import (
    FieldRaster,
    GridSpec,
    WaveCoefficients,
    covariance,
    derive_seed,
    draw,
    draw_batch,
    draw_sample,
    eval_raster,
    evaluate,
    evaluate_batch,
    evaluate_cartesian,
    evaluate_points,
    helmholtz_residual,
    n_trunc_for_radius,
    truncation_order,
)


def test_seed_derivation_is_deterministic():
    assert derive_seed(7, 0) == derive_seed(7, 0)
    seeds = {derive_seed(7, i) for i in range(100)}
    assert len(seeds) == 100
    assert derive_seed(7, 0) != derive_seed(8, 0)


def test_draw_is_reproducible():
    a = draw(12345, 10)
    b = draw(12345, 10)
    assert a.x0 == b.x0
    np.testing.assert_array_equal(a.xs, b.xs)
    np.testing.assert_array_equal(a.ys, b.ys)


def test_longer_truncation_extends_shorter():
    short = draw(99, 5)
    long = draw(99, 12)
    assert short.x0 == long.x0
    np.testing.assert_array_equal(short.xs, long.xs[:5])
    np.testing.assert_array_equal(short.ys, long.ys[:5])


def test_draw_rejects_zero_truncation():
    with pytest.raises(OutOfDomainError):
        draw(1, 0)


def test_batch_rows_equal_single_draws():
    batch = draw_batch(7, [0, 5, 11], 9)
    assert len(batch) == 3
    for row, index in enumerate([0, 5, 11]):
        single = draw_sample(7, index, 9)
        sample = batch.sample(row)
        assert sample.seed == single.seed
        assert sample.x0 == single.x0
        np.testing.assert_array_equal(sample.xs, single.xs)
        np.testing.assert_array_equal(sample.ys, single.ys)


def test_single_mode_is_j0(single_mode):
    for r in (0.0, 0.7, 2.5, 9.0):
        for theta in (0.0, 1.0, 4.0):
            assert evaluate(single_mode, (r, theta)) == pytest.approx(special.j0(r), abs=1e-13)


def test_first_harmonic(first_harmonic):
    r, theta = 2.0, 0.4
    expected = -math.sqrt(2.0) * special.j1(r) * math.cos(theta)
    assert evaluate(first_harmonic, (r, theta)) == pytest.approx(expected, abs=1e-13)


def test_pointwise_paths_agree(random_coeffs):
    rng = np.random.default_rng(0)
    radii = rng.uniform(0, 8, size=50)
    angles = rng.uniform(-math.pi, math.pi, size=50)
    many = evaluate_points(random_coeffs, radii, angles)
    one = np.array([evaluate(random_coeffs, (r, a)) for r, a in zip(radii, angles)])
    np.testing.assert_allclose(many, one, atol=1e-12)

    x, y = radii * np.cos(angles), radii * np.sin(angles)
    np.testing.assert_allclose(evaluate_cartesian(random_coeffs, x, y), one, atol=1e-12)


def test_batch_evaluation_matches_single_samples():
    batch = draw_batch(3, range(6), 15)
    radii = np.array([0.5, 1.5, 3.8, 3.8])
    angles = np.array([0.0, 2.0, 1.0, -2.5])
    values = evaluate_batch(batch, radii, angles)
    assert values.shape == (6, 4)
    for i in range(6):
        expected = evaluate_points(batch.sample(i), radii, angles)
        np.testing.assert_allclose(values[i], expected, atol=1e-12)


def test_raster_matches_pointwise_evaluation(random_coeffs):
    """The octant fast path gives the same values as direct evaluation."""
    grid = GridSpec(h=0.25, half_extent=3.0)
    raster = eval_raster(random_coeffs, grid)
    xx, yy = grid.coordinates()
    assert raster.values.shape == (25, 25)
    np.testing.assert_allclose(raster.values, evaluate_cartesian(random_coeffs, xx, yy), atol=1e-11)
    assert raster.seed == random_coeffs.seed
    assert raster.n_trunc == random_coeffs.n_trunc


def test_offcentre_raster_layout(random_coeffs):
    grid = GridSpec(h=0.5, half_extent=2.0, center=(1.0, -0.5))
    raster = eval_raster(random_coeffs, grid)
    # values[i, j] sits at (cx + (j - K) h, cy + (i - K) h)
    i, j = 1, 6
    x = 1.0 + (j - 4) * 0.5
    y = -0.5 + (i - 4) * 0.5
    assert raster.values[i, j] == pytest.approx(evaluate_cartesian(random_coeffs, x, y), abs=1e-12)


def test_grid_geometry():
    grid = GridSpec(h=0.05, half_extent=6.0)
    assert grid.half_nodes == 120
    assert grid.n_side == 241
    assert grid.is_centred
    assert grid.axis()[0] == pytest.approx(-6.0)
    assert grid.max_radius() == pytest.approx(6.0 * math.sqrt(2.0))


def test_degenerate_grid_rejected():
    with pytest.raises(GeometryError):
        GridSpec(h=1.0, half_extent=2.0)
    with pytest.raises(GeometryError):
        GridSpec(h=0.0, half_extent=2.0)


def test_raster_beyond_validated_radius(random_coeffs):
    with pytest.raises(OutOfDomainError):
        eval_raster(random_coeffs, GridSpec(h=1.0, half_extent=80.0))


def test_raster_rejects_non_finite_values():
    values = np.zeros((9, 9))
    values[2, 3] = np.nan
    with pytest.raises(GeometryError):
        FieldRaster(values=values, h=0.5, half_extent=2.0)


def test_raster_rejects_wrong_shape():
    with pytest.raises(GeometryError):
        FieldRaster(values=np.zeros((8, 9)), h=0.5, half_extent=2.0)


def test_first_moments():
    """Zero mean and unit variance at a fixed point."""
    n = 4000
    batch = draw_batch(11, range(n), truncation_order(2.0, 1e-12))
    values = evaluate_batch(batch, np.array([2.0]), np.array([0.7]))[:, 0]
    assert abs(values.mean()) < 4.0 / math.sqrt(n)
    assert values.var() == pytest.approx(1.0, abs=0.1)


def test_empirical_covariance():
    n = 4000
    d = 1.5
    batch = draw_batch(5, range(n), truncation_order(3.0, 1e-12))
    values = evaluate_batch(batch, np.array([1.0, math.hypot(1.0 + d, 0.0)]), np.array([0.0, 0.0]))
    products = values[:, 0] * values[:, 1]
    assert products.mean() == pytest.approx(covariance(d), abs=0.08)


def test_covariance_function():
    assert covariance(0.0) == pytest.approx(1.0)
    assert covariance(2.404825557695773) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(OutOfDomainError):
        covariance(-1.0)


def test_truncation_order_defining_property():
    eps = 1e-12
    r_max = 3.8
    n = truncation_order(r_max, eps)
    radii = np.append(np.arange(0.0, r_max, 0.1), r_max)
    squares = special.jv(np.arange(201)[None, :], radii[:, None]) ** 2

    def worst_tail(order):
        return float(np.max(2.0 * squares[:, order + 1:].sum(axis=1)))

    assert n >= math.ceil(r_max)
    assert worst_tail(n) <= eps * (1 + 1e-6)
    if n > math.ceil(r_max):
        assert worst_tail(n - 1) > eps * (1 - 1e-6)


def test_truncation_order_grows_with_radius():
    assert truncation_order(10.0, 1e-12) >= truncation_order(3.8, 1e-12)
    assert truncation_order(3.8, 1e-6) <= truncation_order(3.8, 1e-12)
    assert truncation_order(50.0, 0.5) >= 50


@pytest.mark.parametrize("r_max, eps", [(0.0, 1e-12), (1.0, 0.0), (1.0, 1.0), (150.0, 1e-12)])
def test_truncation_order_errors(r_max, eps):
    with pytest.raises(OutOfDomainError):
        truncation_order(r_max, eps)


def test_truncation_override():
    assert n_trunc_for_radius(5.0, 1e-12, override=17) == 17
    with pytest.raises(OutOfDomainError):
        n_trunc_for_radius(5.0, 1e-12, override=0)


def test_rotation_shifts_the_angle(random_coeffs):
    phi = 0.9
    rotated = random_coeffs.rotated(phi)
    for r, theta in ((1.0, 0.3), (4.0, 2.2), (6.5, -1.0)):
        assert evaluate(rotated, (r, theta)) == pytest.approx(evaluate(random_coeffs, (r, theta + phi)), abs=1e-12)


def test_conditioning_on_x0(random_coeffs):
    conditioned = random_coeffs.with_x0(2.0)
    assert conditioned.x0 == 2.0
    np.testing.assert_array_equal(conditioned.xs, random_coeffs.xs)
    delta = evaluate(conditioned, (3.0, 1.0)) - evaluate(random_coeffs, (3.0, 1.0))
    assert delta == pytest.approx((2.0 - random_coeffs.x0) * special.j0(3.0), abs=1e-12)


def test_coefficients_are_read_only(random_coeffs):
    with pytest.raises(ValueError):
        random_coeffs.xs[0] = 0.0
    with pytest.raises(GeometryError):
        WaveCoefficients(0.0, np.zeros(3), np.zeros(4), 3)


def test_helmholtz_residual_is_small():
    coeffs = draw_sample(7, 0, truncation_order(3.0, 1e-12))
    raster = eval_raster(coeffs, GridSpec(h=0.05, half_extent=2.0))
    residual = helmholtz_residual(raster)
    assert residual.shape == (79, 79)
    assert np.max(np.abs(residual)) < 5e-3


def test_doubling_the_truncation_barely_moves_the_field():
    n = truncation_order(10.0, 1e-12)
    short = draw_sample(4, 1, n)
    long = draw_sample(4, 1, 2 * n)
    rng = np.random.default_rng(3)
    for radius, angle in zip(rng.uniform(0.0, 10.0, 50), rng.uniform(0.0, 2.0 * np.pi, 50)):
        assert abs(evaluate(short, (radius, angle)) - evaluate(long, (radius, angle))) < 1e-5
