"""
Verifier.
Monte Carlo and deterministic checks of every statement the lower bound rests
on: covariance and Helmholtz equation of the field, the Bessel identities,
Kac-Rice crossing counts, the circle probability bound, containment of the
centre's nodal domain in a small disk, consistency of the two estimators
of nu_BS, the plausible range of the counted nu_BS and stability of the
domain count under grid refinement.

Every report is a pure function of (name, seed, n_samples, parameters).
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core import config
from src.core.ensemble import EnsembleRunner
from src.core.exceptions import ConfigurationError, OutOfDomainError
from src.wave import bound_engine
from src.wave.circle_probe import (
    batch_circle_values,
    batch_crossing_counts,
    batch_check_no_zero,
    kac_rice_expected_crossings,
    min_samples,
)
from src.wave.field_sampler import (
    GridSpec,
    draw,
    draw_batch,
    draw_sample,
    eval_raster,
    evaluate_batch,
    helmholtz_residual,
    truncation_order,
)
from src.wave.nodal_counter import NuEstimate, estimate_nu, flood_fill_component, sample_census, sign_grid
from src.wave.special_functions import bessel_j0, bessel_j_table, j0_roots

logger = logging.getLogger(__name__)

SUITES = (
    "full",
    "identities",
    "bound",
    "covariance",
    "helmholtz",
    "kac-rice",
    "circle-bound",
    "lemma2",
    "gr-estimator",
    "nu-window",
    "grid-convergence",
)

# how a statistic is compared with its target
TWO_SIDED = "two-sided"
AT_LEAST = "one-sided-lower"
AT_MOST = "one-sided-upper"
TOLERANCE = "tolerance"
RANGE = "range"

KAC_RICE_RADII = (3.0, 3.8, 4.5)
COVARIANCE_DISTANCES = (1.0, 2.5)
HELMHOLTZ_SAMPLES = 10
HELMHOLTZ_STEP = 0.05
HELMHOLTZ_HALF_EXTENT = 3.0
HELMHOLTZ_RATIO_RANGE = (3.5, 4.5)
IDENTITY_TOLERANCES = {"sum_of_squares": 1e-10, "weighted_sum_of_squares": 1e-8, "generating_function": 1e-8}
IDENTITY_ANGLES = 16
IDENTITY_TRUNCATION_EPS = 1e-12
# a tail of 1e-12 in variance leaves about 1e-6 in the generating function
GENERATING_TRUNCATION_EPS = 1e-20
LEMMA2_SCREEN_BLOCK = 100_000


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class VerificationReport:
    """Outcome of one check."""

    name: str
    n_samples: int
    statistic: float
    target: float
    stderr: float
    verdict: Verdict
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n_samples": self.n_samples,
            "statistic": self.statistic,
            "target": self.target,
            "stderr": self.stderr,
            "verdict": self.verdict.value,
            "details": self.details,
        }


def judge(statistic: float, target: float, stderr: float, check: str,
          sigmas: float = config.SIGMA_THRESHOLD) -> Verdict:
    """
    Verdict of a statistic against its target.

    Args:
        statistic: Observed value
        target: Expected value, bound or tolerance
        stderr: Standard error of the statistic
        check: TWO_SIDED, AT_LEAST, AT_MOST or TOLERANCE
        sigmas: Width of the acceptance band in standard errors

    Returns:
        Verdict.PASS or Verdict.FAIL
    """
    band = sigmas * stderr
    if check == TWO_SIDED:
        ok = abs(statistic - target) <= band
    elif check == AT_LEAST:
        ok = statistic >= target - band
    elif check == AT_MOST:
        ok = statistic <= target + band
    elif check == TOLERANCE:
        ok = statistic <= target
    else:
        raise ValueError(f"unknown check {check!r}")
    return Verdict.PASS if ok else Verdict.FAIL


def proportion(hits: int, n: int) -> Tuple[float, float]:
    """Empirical proportion and its standard error (Laplace-smoothed so it never vanishes)."""
    smoothed = (hits + 1.0) / (n + 2.0)
    return hits / n, math.sqrt(smoothed * (1.0 - smoothed) / n)


def _mean_and_stderr(values: np.ndarray) -> Tuple[float, float]:
    if values.size < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(values.size))


# --- per-chunk workers (module level so joblib can ship them) ---------------

def _crossing_chunk(indices: Sequence[int], *, master_seed: int, n_trunc: int, r: float,
                    m: int, x0: float) -> List[int]:
    batch = draw_batch(master_seed, indices, n_trunc).with_x0(x0)
    levels = np.full(len(batch), x0 * bessel_j0(r))
    return batch_crossing_counts(batch, r, m, levels).tolist()


def _event_chunk(indices: Sequence[int], *, master_seed: int, n_trunc: int, r: float,
                 m: int) -> List[Tuple[bool, bool]]:
    """(no-zero event, refinement flag) per sample."""
    batch = draw_batch(master_seed, indices, n_trunc)
    event, flagged = batch_check_no_zero(batch, r, m)
    return list(zip(event.tolist(), flagged.tolist()))


def _covariance_chunk(indices: Sequence[int], *, master_seed: int, n_trunc: int,
                      radii: np.ndarray, angles: np.ndarray) -> List[Tuple[float, ...]]:
    batch = draw_batch(master_seed, indices, n_trunc)
    values = evaluate_batch(batch, radii, angles)
    products = values[:, 0::2] * values[:, 1::2]
    return [tuple(row) for row in products.tolist()]


def _lemma2_screen_chunk(indices: Sequence[int], *, master_seed: int, n_trunc: int, r: float,
                         m: int) -> List[Tuple[bool, int, bool, int, bool]]:
    """(triggered, sign of f(0), circle violation, sample seed, refinement flag) per sample."""
    batch = draw_batch(master_seed, indices, n_trunc)
    event, flagged = batch_check_no_zero(batch, r, m)
    # f(0) = X_0 since J_n(0) = 0 for n >= 1
    centre_sign = np.sign(batch.x0).astype(int)
    triggered = event & (centre_sign != 0)

    violation = np.zeros(len(batch), dtype=bool)
    if triggered.any():
        circle = batch_circle_values(batch.subset(triggered), r, m)
        violation[triggered] = np.any(circle * centre_sign[triggered][:, None] >= 0, axis=1)
    return [
        (bool(t), int(s), bool(v), int(seed), bool(f))
        for t, s, v, seed, f in zip(triggered, centre_sign, violation, batch.seeds, flagged)
    ]


def _containment_check(seed: int, *, r: float, h: float, n_trunc: int) -> Tuple[bool, float]:
    """Whether the nodal domain of the origin reaches distance r, and how far it reaches."""
    grid = GridSpec(h=h, half_extent=r + 1.0)
    raster = eval_raster(draw(seed, n_trunc), grid)
    centre = grid.half_nodes
    component = flood_fill_component(sign_grid(raster), (centre, centre))
    xx, yy = grid.coordinates()
    reach = float(np.sqrt(np.max((xx * xx + yy * yy)[component])))
    return reach >= r, reach


def _helmholtz_ratio(index: int, *, master_seed: int, n_trunc: int, h: float, half_extent: float) -> float:
    coeffs = draw_sample(master_seed, index, n_trunc)
    coarse = helmholtz_residual(eval_raster(coeffs, GridSpec(h, half_extent)))
    fine = helmholtz_residual(eval_raster(coeffs, GridSpec(h / 2.0, half_extent)))
    # nodes shared with the coarse grid
    fine = fine[1::2, 1::2]
    return float(np.sqrt(np.mean(coarse ** 2)) / np.sqrt(np.mean(fine ** 2)))


class Verifier:
    """
    Runs the checks and packages them as VerificationReport objects.
    """

    def __init__(self, n_jobs: int = config.N_THREADS, batch_size: int = config.BATCH_SIZE,
                 eps: float = config.TRUNCATION_EPS):
        """
        Initialize the verifier.

        Args:
            n_jobs: Sample-level parallelism
            batch_size: Samples per vectorised circle batch
            eps: Truncation tolerance of the field expansion
        """
        self.runner = EnsembleRunner(n_jobs)
        self.batch_size = batch_size
        self.eps = eps

    def _report(self, name: str, n_samples: int, statistic: float, target: float, stderr: float,
                check: str, details: Optional[Dict[str, Any]] = None,
                verdict: Optional[Verdict] = None) -> VerificationReport:
        details = dict(details or {})
        details["check"] = check
        if verdict is None:
            verdict = judge(statistic, target, stderr, check)
        report = VerificationReport(name=name, n_samples=n_samples, statistic=float(statistic),
                                    target=float(target), stderr=float(stderr), verdict=verdict,
                                    details=details)
        if verdict is Verdict.PASS:
            logger.info("✓ %s: statistic=%.6g target=%.6g stderr=%.3g", name, statistic, target, stderr)
        else:
            logger.warning("⚠ %s %s: statistic=%.6g target=%.6g stderr=%.3g",
                           name, verdict.value, statistic, target, stderr)
        return report

    def _events(self, r: float, n_samples: int, seed: int) -> Tuple[np.ndarray, int]:
        """No-zero events of samples 0 .. n_samples - 1 and how many the refinement pass changed."""
        m = min_samples(r)
        worker = partial(_event_chunk, master_seed=seed, n_trunc=truncation_order(r, self.eps), r=r, m=m)
        rows = np.array(self.runner.map_chunks(worker, range(n_samples), self.batch_size), dtype=bool)
        rows = rows.reshape(-1, 2)
        return rows[:, 0], int(np.count_nonzero(rows[:, 1]))

    # --- deterministic checks -------------------------------------------------

    def verify_bessel_identities(self, xs: Optional[Sequence[float]] = None) -> List[VerificationReport]:
        """
        Check sum J_n^2 = 1, sum n^2 J_n^2 = x^2 / 2 (sums over all integers n) and
        the generating function exp(i x sin phi) = sum J_n(x) exp(i n phi).

        The sums at x run to truncation_order(x, 1e-12); the generating function,
        whose tail shrinks only like the square root of the discarded variance,
        runs to truncation_order(x, GENERATING_TRUNCATION_EPS). The generating
        function is checked at IDENTITY_ANGLES equispaced angles.
        """
        xs = np.arange(0.5, 10.0 + 0.25, 0.5) if xs is None else np.asarray(xs, dtype=float)
        phis = np.linspace(0.0, 2.0 * np.pi, IDENTITY_ANGLES, endpoint=False)

        sum_orders, generating_orders = [], []
        squares, weighted, generating = [], [], []
        for x in xs:
            n_max = truncation_order(float(x), IDENTITY_TRUNCATION_EPS)
            row = bessel_j_table(x, n_max)[0]
            n = np.arange(1, n_max + 1)
            squares.append(abs(row[0] ** 2 + 2.0 * np.sum(row[1:] ** 2) - 1.0))
            weighted.append(abs(2.0 * np.sum(n ** 2 * row[1:] ** 2) - x ** 2 / 2.0))
            sum_orders.append(n_max)

            n_max = truncation_order(float(x), GENERATING_TRUNCATION_EPS)
            row = bessel_j_table(x, n_max)[0]
            n = np.arange(1, n_max + 1)
            # J_{-n} = (-1)^n J_n
            phase = np.exp(1j * np.outer(phis, n)) + np.exp(-1j * np.outer(phis, n)) * (-1.0) ** n
            series = row[0] + phase @ row[1:]
            generating.append(np.max(np.abs(series - np.exp(1j * x * np.sin(phis)))))
            generating_orders.append(n_max)

        residuals = {
            "sum_of_squares": (float(max(squares)), sum_orders),
            "weighted_sum_of_squares": (float(max(weighted)), sum_orders),
            "generating_function": (float(max(generating)), generating_orders),
        }
        reports = []
        for key, (value, orders) in residuals.items():
            details = {"x_min": float(xs.min()), "x_max": float(xs.max()), "orders": list(orders)}
            if key == "generating_function":
                details["angles"] = IDENTITY_ANGLES
            reports.append(self._report(f"bessel-identity/{key}", len(xs), value, IDENTITY_TOLERANCES[key], 0.0,
                                        TOLERANCE, details))
        return reports

    def verify_bound_replication(self) -> VerificationReport:
        """The rounded factors reproduce the printed bound and exact mode dominates them."""
        printed = bound_engine.paper_point()
        exact = bound_engine.nu_lower_bound(config.PAPER_R, config.PAPER_T, bound_engine.BoundMode.EXACT)
        factors_match = (
            math.isclose(printed.factors["area_factor"], config.PAPER_AREA_FACTOR, abs_tol=1e-12)
            and math.isclose(printed.factors["scaled_threshold"], config.PAPER_SCALED_THRESHOLD, abs_tol=1e-12)
            and math.isclose(printed.factors["half_perimeter"], config.PAPER_HALF_PERIMETER, abs_tol=1e-12)
        )
        dominates = exact.nu_lb >= printed.nu_lb

        # the circle bound is the integrated integrand, and the integrand vanishes at its threshold
        r, T = config.PAPER_R, config.PAPER_T
        closed_form = bound_engine.circle_prob_lower_bound(r, T)
        integrated = bound_engine.integrated_circle_bound(r, T)
        identity_residual = abs(integrated - closed_form)
        at_threshold = bound_engine.circle_integrand(r, bound_engine.threshold_T(r))
        integrand_consistent = (
            math.isclose(integrated, closed_form, rel_tol=1e-9, abs_tol=1e-15)
            and abs(at_threshold) < 1e-9
            and bound_engine.circle_integrand(r, T) >= 0.0
        )

        verdict = judge(printed.nu_lb, config.PAPER_NU_BOUND, 0.0, AT_LEAST)
        if not (factors_match and dominates and integrand_consistent):
            verdict = Verdict.FAIL
        return self._report(
            "bound-replication", 0, printed.nu_lb, config.PAPER_NU_BOUND, 0.0, AT_LEAST,
            {"exact_nu_lb": exact.nu_lb, "factors": printed.factors, "factors_match": factors_match,
             "exact_dominates": dominates, "integrand_identity_residual": identity_residual,
             "integrand_at_threshold": at_threshold, "integrand_consistent": integrand_consistent},
            verdict=verdict,
        )

    # --- Monte Carlo checks ---------------------------------------------------

    def verify_covariance(self, d: float = 1.0, n_samples: int = config.VERIFY_SAMPLES,
                          seed: int = config.MASTER_SEED) -> List[VerificationReport]:
        """
        Empirical E[f(p) f(q)] for two pairs at distance d, placed and oriented
        differently, against J_0(d).

        Returns:
            One two-sided report per pair
        """
        if d < 0:
            raise OutOfDomainError("distance must be >= 0")
        pairs = [
            ((0.0, 0.0), (d, 0.0)),
            ((1.3, -0.7), (1.3 + d * math.cos(1.1), -0.7 + d * math.sin(1.1))),
        ]
        points = np.array([p for pair in pairs for p in pair])
        radii = np.hypot(points[:, 0], points[:, 1])
        angles = np.arctan2(points[:, 1], points[:, 0])

        worker = partial(_covariance_chunk, master_seed=seed, n_trunc=truncation_order(radii.max() + 1e-9, self.eps),
                         radii=radii, angles=angles)
        products = np.array(self.runner.map_chunks(worker, range(n_samples), self.batch_size))
        target = bessel_j0(float(d))

        reports = []
        for k, (p, q) in enumerate(pairs):
            mean, stderr = _mean_and_stderr(products[:, k])
            reports.append(self._report(f"covariance/pair{k}", n_samples, mean, target, stderr, TWO_SIDED,
                                        {"d": d, "p": list(p), "q": list(q), "seed": seed}))
        return reports

    def verify_helmholtz(self, n_samples: int = HELMHOLTZ_SAMPLES, seed: int = config.MASTER_SEED,
                         h: float = HELMHOLTZ_STEP,
                         half_extent: float = HELMHOLTZ_HALF_EXTENT) -> VerificationReport:
        """
        Second-order convergence of the five-point residual Delta_h f + f.

        The RMS residual at h over the RMS residual at h/2 (on shared nodes)
        must lie in [3.5, 4.5] for every sample.
        """
        n_trunc = truncation_order(half_extent * math.sqrt(2.0), self.eps)
        worker = partial(_helmholtz_ratio, master_seed=seed, n_trunc=n_trunc, h=h, half_extent=half_extent)
        ratios = np.array(self.runner.map(worker, range(n_samples)))
        low, high = HELMHOLTZ_RATIO_RANGE
        ok = bool(np.all((ratios >= low) & (ratios <= high)))
        mean, stderr = _mean_and_stderr(ratios)
        return self._report("helmholtz", n_samples, mean, 4.0, stderr, RANGE,
                            {"ratios": ratios.tolist(), "range": [low, high], "h": h, "seed": seed},
                            verdict=Verdict.PASS if ok else Verdict.FAIL)

    def verify_kac_rice(self, r: float, x0_list: Sequence[float] = (0.0, 1.0, 2.0),
                        n_samples: int = config.VERIFY_SAMPLES,
                        seed: int = config.MASTER_SEED) -> List[VerificationReport]:
        """
        Conditioned mean crossing counts against the Kac-Rice expectation.

        For each x0 the coefficients are drawn, X_0 is replaced by x0 and the
        crossings of u through x0 J_0(r) are counted. Each x0 yields a two-sided
        report and a one-sided Markov report P[crossings > 0] <= mean / 2.

        Args:
            r: Circle radius
            x0_list: Conditioned values of X_0
            n_samples: Monte Carlo size
            seed: Master seed

        Returns:
            Two reports per x0
        """
        m = min_samples(r)
        n_trunc = truncation_order(r, self.eps)
        reports = []
        for x0 in x0_list:
            worker = partial(_crossing_chunk, master_seed=seed, n_trunc=n_trunc, r=r, m=m, x0=float(x0))
            counts = np.array(self.runner.map_chunks(worker, range(n_samples), self.batch_size), dtype=float)
            mean, stderr = _mean_and_stderr(counts)
            target = kac_rice_expected_crossings(r, x0)
            details = {"r": r, "x0": float(x0), "m": m, "n_trunc": n_trunc, "seed": seed,
                       "odd_counts": int(np.count_nonzero(counts % 2))}
            verdict = None if n_samples >= 2 else Verdict.INCONCLUSIVE
            reports.append(self._report(f"kac-rice/r={r:g}/x0={x0:g}", n_samples, mean, target, stderr,
                                        TWO_SIDED, details, verdict=verdict))

            hit, hit_stderr = proportion(int(np.count_nonzero(counts > 0)), n_samples)
            markov_stderr = math.hypot(hit_stderr, stderr / 2.0)
            reports.append(self._report(f"markov/r={r:g}/x0={x0:g}", n_samples, hit, mean / 2.0, markov_stderr,
                                        AT_MOST, {"r": r, "x0": float(x0), "seed": seed}, verdict=verdict))
        return reports

    def verify_circle_bound(self, r: float, T: float, n_samples: int = config.VERIFY_SAMPLES,
                            seed: int = config.MASTER_SEED) -> VerificationReport:
        """
        One-sided check that the empirical P[E_r] is at least the analytic lower bound.

        Args:
            r: Circle radius
            T: Threshold of the bound
            n_samples: Monte Carlo size
            seed: Master seed

        Returns:
            VerificationReport
        """
        bound = bound_engine.circle_prob_lower_bound(r, T)
        events, refinement_flags = self._events(r, n_samples, seed)
        hits = int(np.count_nonzero(events))
        p_hat, stderr = proportion(hits, n_samples)
        return self._report(f"circle-bound/r={r:g}/T={T:g}", n_samples, p_hat, bound, stderr, AT_LEAST,
                            {"r": r, "T": T, "events": hits, "m": min_samples(r), "seed": seed,
                             "refinement_flags": refinement_flags})

    def verify_lemma2(self, r: float, n_samples: int = config.LEMMA2_SAMPLES, seed: int = config.MASTER_SEED,
                      h: float = config.LEMMA2_GRID_STEP,
                      target_triggering: int = config.LEMMA2_TRIGGERING) -> VerificationReport:
        """
        Containment of the centre's nodal domain in B(0, r) whenever f keeps one
        sign on the circle of radius r.

        Samples are screened for the event in blocks of LEMMA2_SCREEN_BLOCK
        indices; screening stops after the first block that brings the number of
        triggering samples (event on the circle and f(0) != 0) to
        ``target_triggering``, or when ``n_samples`` indices have been screened.
        For every triggering sample two things are checked: (a) the circle
        values have the sign opposite to f(0), and (b) the flood-fill component
        of the origin on a raster of half extent r + 1 contains no node at
        distance >= r. Samples with f(0) < 0 are covered by the sign symmetry of
        the field. The distance reached by the component is recorded but never
        asserted on.

        Args:
            r: Circle radius in (r_1, r_2)
            n_samples: Screening budget (largest number of indices screened)
            seed: Master seed
            h: Raster step of the containment check
            target_triggering: Triggering samples after which screening stops (0 screens the whole budget)

        Returns:
            VerificationReport whose statistic is the number of violating samples
        """
        r1, r2 = j0_roots(2)
        if not r1 < r < r2:
            raise OutOfDomainError(f"r = {r} must lie strictly between the first two zeros of J_0")

        m = min_samples(r)
        screen = partial(_lemma2_screen_chunk, master_seed=seed, n_trunc=truncation_order(r, self.eps), r=r, m=m)
        triggered: List[Tuple[bool, int, bool, int, bool]] = []
        refinement_flags = 0
        n_screened = 0
        while n_screened < n_samples:
            block = range(n_screened, min(n_screened + LEMMA2_SCREEN_BLOCK, n_samples))
            rows = self.runner.map_chunks(screen, block, self.batch_size)
            triggered.extend(s for s in rows if s[0])
            refinement_flags += sum(1 for s in rows if s[4])
            n_screened = block.stop
            logger.info("🔎 %d of %d samples trigger the no-zero event at r=%g", len(triggered), n_screened, r)
            if 0 < target_triggering <= len(triggered):
                break

        raster_order = truncation_order((r + 1.0) * math.sqrt(2.0), self.eps)
        check = partial(_containment_check, r=r, h=h, n_trunc=raster_order)
        contained = self.runner.map(check, [s[3] for s in triggered])

        circle_violations = np.array([s[2] for s in triggered], dtype=bool)
        escape_violations = np.array([c[0] for c in contained], dtype=bool)
        reach = np.array([c[1] for c in contained], dtype=float)
        violations = int(np.count_nonzero(circle_violations | escape_violations))

        details = {
            "r": r,
            "h": h,
            "seed": seed,
            "screened": n_screened,
            "target_triggering": target_triggering,
            "target_reached": 0 < target_triggering <= len(triggered),
            "refinement_flags": refinement_flags,
            "triggering": len(triggered),
            "negative_centre": sum(1 for s in triggered if s[1] < 0),
            "circle_violations": int(circle_violations.sum()),
            "containment_violations": int(escape_violations.sum()),
            "reach_over_r": self._reach_summary(reach / r),
        }
        verdict = None
        if len(triggered) < config.MIN_TRIGGERING_SAMPLES:
            verdict = Verdict.INCONCLUSIVE
            details["reason"] = f"fewer than {config.MIN_TRIGGERING_SAMPLES} triggering samples"
        if violations:
            verdict = Verdict.FAIL
        return self._report("lemma2", n_screened, violations, 0.0, 0.0, AT_MOST, details, verdict=verdict)

    @staticmethod
    def _reach_summary(ratios: np.ndarray) -> Dict[str, Any]:
        if ratios.size == 0:
            return {}
        counts, edges = np.histogram(np.clip(ratios, 0.0, 1.0), bins=10, range=(0.0, 1.0))
        return {
            "median": float(np.median(ratios)),
            "q90": float(np.quantile(ratios, 0.9)),
            "q99": float(np.quantile(ratios, 0.99)),
            "max": float(ratios.max()),
            "histogram": counts.tolist(),
            "bin_edges": edges.tolist(),
        }

    def count_ensemble(self, R: float, h: float, n_samples: int, seed: int,
                       n_trunc: Optional[int] = None) -> NuEstimate:
        """Census ``n_samples`` members of the ensemble of ``seed`` and estimate nu_BS."""
        worker = partial(sample_census, master_seed=seed, R=R, h=h, eps=self.eps, n_trunc=n_trunc)
        return estimate_nu(self.runner.map(worker, range(n_samples)))

    def verify_gr_estimator(self, r: float, n_samples: int = config.VERIFY_SAMPLES,
                            seed: int = config.MASTER_SEED, nu_estimate: Optional[NuEstimate] = None,
                            R: float = config.COUNT_RADIUS, h: float = config.GRID_STEP,
                            count_samples: int = config.COUNT_SAMPLES) -> VerificationReport:
        """
        Check 16 P[E_r] / r^2 <= nu_hat + 3 combined standard errors.

        Args:
            r: Circle radius
            n_samples: Monte Carlo size of the circle estimate
            seed: Master seed
            nu_estimate: Counting estimate to compare with (computed when None)
            R: Counting radius used when nu_estimate is None
            h: Grid step used when nu_estimate is None
            count_samples: Ensemble size used when nu_estimate is None

        Returns:
            VerificationReport
        """
        if n_samples < 2 or (nu_estimate is None and count_samples < 2):
            return self._report("gr-estimator", n_samples, 0.0, 0.0, 0.0, AT_MOST,
                                {"reason": "need at least two samples on both sides"},
                                verdict=Verdict.INCONCLUSIVE)

        events, _ = self._events(r, n_samples, seed)
        p_hat, p_stderr = proportion(int(np.count_nonzero(events)), n_samples)
        scale = 16.0 / (r * r)

        if nu_estimate is None:
            nu_estimate = self.count_ensemble(R, h, count_samples, seed)
        combined = math.hypot(scale * p_stderr, nu_estimate.stderr)
        return self._report("gr-estimator", n_samples, scale * p_hat, nu_estimate.nu_hat, combined, AT_MOST,
                            {"r": r, "p_hat": p_hat, "nu_estimate": nu_estimate.to_dict(), "seed": seed})

    def verify_grid_convergence(self, R: float = config.COUNT_RADIUS, h: float = config.GRID_STEP,
                                n_samples: int = config.COUNT_SAMPLES, seed: int = config.MASTER_SEED,
                                coarse: Optional[NuEstimate] = None) -> VerificationReport:
        """
        Estimates of nu_BS at steps h and h/2 on the same samples agree within
        two combined standard errors.

        Args:
            R: Counting radius
            h: Coarse grid step
            n_samples: Ensemble size of each estimate
            seed: Master seed
            coarse: Estimate at step h on the same samples (computed when None)

        Returns:
            VerificationReport
        """
        if n_samples < 2:
            return self._report("grid-convergence", n_samples, 0.0, 0.0, 0.0, TWO_SIDED,
                                {"reason": "need at least two samples"}, verdict=Verdict.INCONCLUSIVE)
        if coarse is None:
            coarse = self.count_ensemble(R, h, n_samples, seed)
        fine = self.count_ensemble(R, h / 2.0, n_samples, seed)
        combined = math.hypot(coarse.stderr, fine.stderr)
        verdict = judge(coarse.nu_hat, fine.nu_hat, combined, TWO_SIDED, sigmas=2.0)
        return self._report("grid-convergence", n_samples, coarse.nu_hat, fine.nu_hat, combined, TWO_SIDED,
                            {"R": R, "h": h, "coarse": coarse.to_dict(), "fine": fine.to_dict(), "seed": seed,
                             "sigmas": 2.0},
                            verdict=verdict)

    def verify_nu_window(self, R: float = config.COUNT_RADIUS, h: float = config.GRID_STEP,
                         n_samples: int = config.COUNT_SAMPLES, seed: int = config.MASTER_SEED,
                         nu_estimate: Optional[NuEstimate] = None) -> VerificationReport:
        """
        The anchored estimate of nu_BS falls inside NU_WINDOW, widened by three
        standard errors on each side.

        The containment estimate nu_hat is reported next to it together with
        the boundary loss 1 - nu_hat / nu_anchored, which shrinks like 1 / R.

        Args:
            R: Counting radius
            h: Grid step
            n_samples: Ensemble size
            seed: Master seed
            nu_estimate: Counting estimate to judge (computed when None)

        Returns:
            VerificationReport
        """
        low, high = config.NU_WINDOW
        if nu_estimate is None and n_samples < 2:
            return self._report("nu-window", n_samples, 0.0, config.NU_REFERENCE, 0.0, RANGE,
                                {"reason": "need at least two samples", "window": [low, high]},
                                verdict=Verdict.INCONCLUSIVE)
        if nu_estimate is None:
            nu_estimate = self.count_ensemble(R, h, n_samples, seed)

        statistic, stderr = nu_estimate.nu_anchored, nu_estimate.stderr_anchored
        band = config.SIGMA_THRESHOLD * stderr
        inside = low - band <= statistic <= high + band
        loss = 1.0 - nu_estimate.nu_hat / statistic if statistic > 0 else float("nan")
        details = {
            "R": nu_estimate.R,
            "h": nu_estimate.h,
            "seed": seed,
            "window": [low, high],
            "nu_inside": nu_estimate.nu_hat,
            "stderr_inside": nu_estimate.stderr,
            "boundary_loss": loss,
            "nu_reference": config.NU_REFERENCE,
            "nu_percolation": config.NU_PERCOLATION,
        }
        return self._report("nu-window", nu_estimate.n_samples, statistic, config.NU_REFERENCE, stderr, RANGE,
                            details, verdict=Verdict.PASS if inside else Verdict.FAIL)

    # --- suites ---------------------------------------------------------------

    def run_suite(self, name: str, seed: int = config.MASTER_SEED, r: Optional[float] = None,
                  T: Optional[float] = None, x0_list: Sequence[float] = (0.0, 1.0, 2.0),
                  n_samples: Optional[int] = None, R: float = config.COUNT_RADIUS,
                  h: float = config.GRID_STEP, count_samples: int = config.COUNT_SAMPLES,
                  lemma2_samples: Optional[int] = None,
                  lemma2_triggering: int = config.LEMMA2_TRIGGERING) -> List[VerificationReport]:
        """
        Run a named group of checks.

        The counting ensemble at (R, h) is computed once and shared by the
        gr-estimator, nu-window and grid-convergence checks.

        Args:
            name: One of SUITES
            seed: Master seed
            r: Circle radius (3.8 when None; Kac-Rice then runs at 3.0, 3.8 and 4.5)
            T: Threshold of the circle bound (3.35 and threshold_T(r) when None)
            x0_list: Conditioned X_0 values of the Kac-Rice check
            n_samples: Monte Carlo size of the circle checks
            R: Counting radius of the counting checks
            h: Grid step of the counting checks
            count_samples: Counting ensemble size of the counting checks
            lemma2_samples: Screening budget of the containment check
            lemma2_triggering: Triggering samples after which the containment screening stops

        Returns:
            Reports in execution order
        """
        if name not in SUITES:
            raise ConfigurationError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
        n_samples = config.VERIFY_SAMPLES if n_samples is None else n_samples
        lemma2_samples = config.LEMMA2_SAMPLES if lemma2_samples is None else lemma2_samples
        radius = config.PAPER_R if r is None else r
        selected = SUITES[1:] if name == "full" else (name,)

        counted: Optional[NuEstimate] = None

        def counting_estimate() -> Optional[NuEstimate]:
            nonlocal counted
            if counted is None and count_samples >= 2:
                counted = self.count_ensemble(R, h, count_samples, seed)
            return counted

        reports: List[VerificationReport] = []
        for suite in selected:
            logger.info("Running %s checks...", suite)
            if suite == "identities":
                reports.extend(self.verify_bessel_identities())
            elif suite == "bound":
                reports.append(self.verify_bound_replication())
            elif suite == "covariance":
                for d in COVARIANCE_DISTANCES:
                    reports.extend(self.verify_covariance(d, n_samples, seed))
            elif suite == "helmholtz":
                reports.append(self.verify_helmholtz(seed=seed))
            elif suite == "kac-rice":
                for radius_k in (KAC_RICE_RADII if r is None else (r,)):
                    reports.extend(self.verify_kac_rice(radius_k, x0_list, n_samples, seed))
            elif suite == "circle-bound":
                thresholds = (config.PAPER_T, bound_engine.threshold_T(radius)) if T is None else (T,)
                for threshold in thresholds:
                    reports.append(self.verify_circle_bound(radius, threshold, n_samples, seed))
            elif suite == "lemma2":
                reports.append(self.verify_lemma2(radius, lemma2_samples, seed,
                                                  target_triggering=lemma2_triggering))
            elif suite == "grid-convergence":
                reports.append(self.verify_grid_convergence(R, h, count_samples, seed, coarse=counting_estimate()))
            elif suite == "nu-window":
                reports.append(self.verify_nu_window(R, h, count_samples, seed, nu_estimate=counting_estimate()))
            elif suite == "gr-estimator":
                reports.append(self.verify_gr_estimator(radius, n_samples, seed, nu_estimate=counting_estimate(),
                                                        R=R, h=h, count_samples=count_samples))
        return reports
