"""Numerical core: special functions, field sampling, circle probes, nodal counting, bounds and checks."""
from src.wave.special_functions import bessel_j_row, gaussian_tail, j0_first_min, j0_roots
from src.wave.field_sampler import (
    FieldRaster,
    GridSpec,
    WaveCoefficients,
    covariance,
    draw,
    eval_raster,
    evaluate,
    truncation_order,
)
from src.wave.circle_probe import count_crossings, event_no_zero, kac_rice_expected_crossings, trace
from src.wave.nodal_counter import census, estimate_nu, label
from src.wave.bound_engine import BoundMode, alpha, circle_prob_lower_bound, nu_lower_bound, optimize, threshold_T
from src.wave.verifier import Verdict, VerificationReport, Verifier

__all__ = [
    'bessel_j_row',
    'gaussian_tail',
    'j0_first_min',
    'j0_roots',
    'FieldRaster',
    'GridSpec',
    'WaveCoefficients',
    'covariance',
    'draw',
    'eval_raster',
    'evaluate',
    'truncation_order',
    'count_crossings',
    'event_no_zero',
    'kac_rice_expected_crossings',
    'trace',
    'census',
    'estimate_nu',
    'label',
    'BoundMode',
    'alpha',
    'circle_prob_lower_bound',
    'nu_lower_bound',
    'optimize',
    'threshold_T',
    'Verdict',
    'VerificationReport',
    'Verifier',
]
