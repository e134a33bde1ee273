"""Tests for circle traces, crossing counts and the no-zero event."""
import math

import numpy as np
import pytest

from src.core.exceptions import OutOfDomainError
from src.wave.circle_probe import (
    batch_check_no_zero,
    batch_circle_values,
    batch_crossing_counts,
    check_no_zero,
    count_crossings,
    event_no_zero,
    kac_rice_expected_crossings,
    min_samples,
    trace,
)
from src.wave.field_sampler import draw_batch, truncation_order
from src.wave.special_functions import bessel_j0, j0_roots


def test_sampling_floor():
    assert min_samples(1.0) == 64
    assert min_samples(3.8) == 244


def test_constant_field_has_flat_u(single_mode):
    tr = trace(single_mode, r=2.0)
    assert tr.m == 128
    assert tr.is_centred
    np.testing.assert_allclose(tr.u_values, 0.0, atol=1e-12)
    np.testing.assert_allclose(tr.values, bessel_j0(2.0), atol=1e-12)
    report = count_crossings(tr, 0.5)
    assert report.count == 0
    assert report.refined_angles == ()


def test_first_harmonic_crosses_twice(first_harmonic):
    """u = sqrt(2) J_1(r) cos(theta) changes sign at pi/2 and 3 pi/2."""
    tr = trace(first_harmonic, r=2.0)
    report = count_crossings(tr, 0.0)
    assert report.count == 2
    assert report.refined_angles[0] == pytest.approx(math.pi / 2, abs=1e-7)
    assert report.refined_angles[1] == pytest.approx(3 * math.pi / 2, abs=1e-7)
    assert not report.suspicious


def test_level_above_the_maximum(first_harmonic):
    tr = trace(first_harmonic, r=2.0)
    assert count_crossings(tr, 10.0).count == 0


def test_exact_zero_between_opposite_signs_counts_once(first_harmonic):
    tr = trace(first_harmonic, r=2.0, m=128)
    u = tr.u_values.copy()
    u[32] = 0.0
    u[96] = 0.0
    patched = type(tr)(center=tr.center, r=tr.r, m=tr.m, values=tr.values, u_values=u, coeffs=tr.coeffs)
    assert count_crossings(patched, 0.0).count == 2


def test_touching_zero_is_not_a_crossing(single_mode):
    tr = trace(single_mode, r=1.0)
    u = np.ones(tr.m)
    u[5] = 0.0
    patched = type(tr)(center=tr.center, r=tr.r, m=tr.m, values=tr.values, u_values=u, coeffs=tr.coeffs)
    assert count_crossings(patched, 0.0).count == 0


def test_sampling_floor_is_enforced(first_harmonic):
    with pytest.raises(OutOfDomainError):
        trace(first_harmonic, r=2.0, m=100)
    with pytest.raises(OutOfDomainError):
        trace(first_harmonic, r=0.0)


def test_offcentre_trace_has_no_u(single_mode):
    tr = trace(single_mode, center=(0.5, 0.0), r=1.0)
    assert tr.u_values is None
    assert not tr.is_centred
    with pytest.raises(OutOfDomainError):
        count_crossings(tr, 0.0)


def test_kac_rice_closed_form():
    r = 3.8
    alpha = math.sqrt(1.0 - bessel_j0(r) ** 2)
    assert kac_rice_expected_crossings(r, 0.0) == pytest.approx(math.sqrt(2.0) * r / alpha)
    expected = math.sqrt(2.0) * r / alpha * math.exp(-(2.0 * bessel_j0(r)) ** 2 / (2 * alpha ** 2))
    assert kac_rice_expected_crossings(r, 2.0) == pytest.approx(expected)
    assert kac_rice_expected_crossings(r, 2.0) < kac_rice_expected_crossings(r, 0.0)
    assert kac_rice_expected_crossings(r, -2.0) == pytest.approx(kac_rice_expected_crossings(r, 2.0))


def test_kac_rice_at_first_zero_ignores_x0():
    r1 = j0_roots(1)[0]
    for x0 in (0.0, 1.0, 5.0):
        assert kac_rice_expected_crossings(r1, x0) == pytest.approx(math.sqrt(2.0) * r1, rel=1e-9)


def test_kac_rice_rejects_nonpositive_radius():
    with pytest.raises(OutOfDomainError):
        kac_rice_expected_crossings(0.0, 1.0)


def test_no_zero_event(single_mode, first_harmonic):
    assert event_no_zero(trace(single_mode, r=1.0))
    assert event_no_zero(trace(single_mode, center=(0.5, 0.0), r=1.0))
    assert not event_no_zero(trace(first_harmonic, r=2.0))
    assert event_no_zero(trace(single_mode.with_x0(-1.0), r=3.0))


def test_batch_counts_match_scalar_counts():
    r = 3.8
    m = min_samples(r)
    batch = draw_batch(5, range(20), truncation_order(r, 1e-12))
    levels = batch.x0 * bessel_j0(r)
    counts = batch_crossing_counts(batch, r, m, levels)
    for i in range(len(batch)):
        tr = trace(batch.sample(i), r=r, m=m)
        assert counts[i] == count_crossings(tr, levels[i]).count
    assert np.all(counts % 2 == 0)


def test_batch_no_zero_matches_scalar_event():
    r = 1.0
    m = min_samples(r)
    batch = draw_batch(9, range(40), truncation_order(r, 1e-12))
    events, _ = batch_check_no_zero(batch, r, m)
    expected = [event_no_zero(trace(batch.sample(i), r=r, m=m)) for i in range(len(batch))]
    assert events.tolist() == expected
    assert events.any()


def test_check_no_zero_reports_agreeing_passes(single_mode, first_harmonic):
    kept = check_no_zero(trace(single_mode, r=2.0))
    assert kept.no_zero and not kept.flagged
    crossed = check_no_zero(trace(first_harmonic, r=2.0))
    assert not crossed.no_zero and not crossed.flagged


def test_batch_flags_are_the_disagreements_of_the_two_passes():
    r = 3.8
    m = min_samples(r)
    batch = draw_batch(13, range(2000), truncation_order(r, 1e-12))
    refined, flagged = batch_check_no_zero(batch, r, m)

    def strict(values):
        return np.all(values > 0, axis=1) | np.all(values < 0, axis=1)

    first = strict(batch_circle_values(batch, r, m))
    np.testing.assert_array_equal(refined, strict(batch_circle_values(batch, r, 2 * m)))
    np.testing.assert_array_equal(flagged, first != refined)
    # the coarse angles are a subset of the fine ones
    assert not np.any(refined & ~first)
    for i in range(5):
        verdict = check_no_zero(trace(batch.sample(i), r=r, m=m))
        assert verdict.no_zero == refined[i]
        assert verdict.flagged == flagged[i]


def test_crossing_counts_are_stable_under_refinement():
    r = 3.8
    m = min_samples(r)
    batch = draw_batch(21, range(10_000), truncation_order(r, 1e-12))
    levels = batch.x0 * bessel_j0(r)
    coarse = batch_crossing_counts(batch, r, m, levels)
    fine = batch_crossing_counts(batch, r, 2 * m, levels)
    assert np.all(fine >= coarse)
    assert np.mean(fine == coarse) >= 0.999
