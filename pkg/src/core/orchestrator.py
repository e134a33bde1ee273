"""Orchestrator.
Coordinates the work behind every CLI subcommand: bound evaluation, raster
sampling, nodal counting and verification.
"""
import logging
from functools import partial
from typing import Dict, List

from src.core import config
from src.core.config import RunConfig
from src.core.ensemble import EnsembleRunner
from src.core.exceptions import ConfigurationError
from src.utils.exporter import RunExporter
from src.wave import bound_engine
from src.wave.field_sampler import GridSpec, draw_sample, eval_raster, n_trunc_for_radius
from src.wave.nodal_counter import NodalCensus, estimate_nu, sample_census
from src.wave.verifier import Verifier

logger = logging.getLogger(__name__)

BOUND_CSV_COLUMNS = (
    "r", "T", "mode", "alpha", "j0_r", "psi_T", "psi_scaled", "circle_prob_lb", "nu_lb",
    "area_factor", "scaled_threshold", "half_perimeter",
)
CENSUS_CSV_COLUMNS = ("index", "seed", "R", "h", "n_inside", "n_touching", "n_anchored", "zero_node_count")
REPORT_CSV_COLUMNS = ("name", "n_samples", "statistic", "target", "stderr", "verdict")


class Orchestrator:
    """
    Orchestrates one CLI run.
    Every output is a pure function of the run configuration, the seed and the version.
    """

    def __init__(self, run_config: RunConfig, export_dir: str = config.EXPORT_DIR):
        """
        Initialize orchestrator for a run.

        Args:
            run_config: Parameters of the run
            export_dir: Default directory for raster output
        """
        logger.info(f"Initializing Orchestrator for '{run_config.command}'...")
        self.run_config = run_config
        self.exporter = RunExporter(export_dir, run_config)
        self.runner = EnsembleRunner(run_config.threads)

    def run(self) -> int:
        """
        Dispatch to the subcommand.

        Returns:
            Process exit code
        """
        handlers = {
            "bound": self.run_bound,
            "sample": self.run_sample,
            "count": self.run_count,
            "verify": self.run_verify,
        }
        if self.run_config.command not in handlers:
            raise ConfigurationError(f"unknown command {self.run_config.command!r}")
        return handlers[self.run_config.command]()

    def run_bound(self) -> int:
        """
        Evaluate the lower bound at (r, T), or search its maximum.

        Returns:
            Exit code 0
        """
        cfg = self.run_config
        if cfg.optimize:
            logger.info("\n🔍 Step 1: Optimizing the bound over (r, T)...")
            result = bound_engine.optimize()
            best = result.best
            payload = {"optimization": result.to_dict()}
            logger.info(f"✓ r*={result.r_star:.6f} T*={result.T_star:.6f} nu_lb={best.nu_lb:.6e}")
        else:
            r = config.PAPER_R if cfg.r is None else cfg.r
            T = config.PAPER_T if cfg.T is None else cfg.T
            logger.info(f"\n🔍 Step 1: Evaluating the bound at r={r}, T={T} ({cfg.mode} mode)...")
            best = bound_engine.nu_lower_bound(r, T, bound_engine.BoundMode(cfg.mode))
            payload = {"evaluation": best.to_dict()}
            logger.info(f"✓ nu_lb={best.nu_lb:.6e}")

        with self.exporter.open_stream(cfg.output) as stream:
            if cfg.format == "csv":
                data = best.to_dict()
                row = [data[k] for k in BOUND_CSV_COLUMNS[:9]] + [data["factors"][k] for k in BOUND_CSV_COLUMNS[9:]]
                self.exporter.write_csv(stream, BOUND_CSV_COLUMNS, [row])
            else:
                self.exporter.write_document(stream, payload)
        return 0

    def run_sample(self) -> int:
        """
        Draw one ensemble member and write its raster.

        Returns:
            Exit code 0
        """
        cfg = self.run_config
        half_extent = config.SAMPLE_HALF_EXTENT if cfg.half_extent is None else cfg.half_extent
        grid = GridSpec(h=cfg.h, half_extent=half_extent, center=tuple(cfg.center))

        logger.info(f"\n🎲 Step 1: Drawing sample {cfg.index} of seed {cfg.master_seed}...")
        n_trunc = n_trunc_for_radius(grid.max_radius(), cfg.eps, cfg.n_trunc)
        coeffs = draw_sample(cfg.master_seed, cfg.index, n_trunc)
        logger.info(f"✓ Truncation order {n_trunc}")

        logger.info(f"\n🗺️ Step 2: Evaluating {grid.n_side}x{grid.n_side} raster...")
        raster = eval_raster(coeffs, grid)

        logger.info("\n💾 Step 3: Exporting raster...")
        files = self.exporter.export_raster(raster, cfg.output, "csv" if cfg.format == "csv" else "bin")
        with self.exporter.open_stream(None) as stream:
            self.exporter.write_line(stream, {"type": "raster", "files": files, "seed": coeffs.seed,
                                              "n_trunc": n_trunc})
        return 0

    def _resume_state(self) -> Dict[int, NodalCensus]:
        cfg = self.run_config
        header, done = self.exporter.read_censuses(cfg.output)
        if header is not None:
            previous = header.get("config", {})
            for key in ("master_seed", "R", "h", "n_trunc", "eps"):
                if key in previous and previous[key] != getattr(cfg, key):
                    raise ConfigurationError(f"cannot resume: '{key}' differs from the interrupted run")
        return {i: c for i, c in done.items() if i < cfg.n_samples}

    def run_count(self) -> int:
        """
        Count nodal domains over an ensemble and estimate nu_BS.

        Censuses stream one per line in sample order; with --resume the samples
        already present in the output file are kept and only the rest are drawn.

        Returns:
            Exit code 0
        """
        cfg = self.run_config
        if cfg.n_samples is None:
            cfg.n_samples = config.COUNT_SAMPLES
        done: Dict[int, NodalCensus] = self._resume_state() if cfg.resume else {}
        pending = [i for i in range(cfg.n_samples) if i not in done]

        logger.info("=" * 60)
        logger.info(f"Counting nodal domains: R={cfg.R}, h={cfg.h}, {cfg.n_samples} samples "
                    f"({len(done)} resumed)")
        logger.info("=" * 60)

        worker = partial(sample_census, master_seed=cfg.master_seed, R=cfg.R, h=cfg.h, eps=cfg.eps,
                         n_trunc=cfg.n_trunc)
        block = max(1, 4 * cfg.threads)
        censuses = dict(done)

        logger.info("\n📊 Step 1: Sampling, labelling and counting...")
        if cfg.format == "csv":
            for start in range(0, len(pending), block):
                chunk = pending[start:start + block]
                censuses.update(zip(chunk, self.runner.map(worker, chunk)))
        else:
            with self.exporter.open_stream(cfg.output) as stream:
                self.exporter.write_line(stream, self.exporter.header())
                for index in sorted(done):
                    self.exporter.write_census(stream, index, done[index])
                for start in range(0, len(pending), block):
                    chunk = pending[start:start + block]
                    for index, result in zip(chunk, self.runner.map(worker, chunk)):
                        censuses[index] = result
                        self.exporter.write_census(stream, index, result)
                    logger.info(f"✓ {len(censuses)}/{cfg.n_samples} samples counted")
                self._write_estimate(stream, censuses)
            return 0

        with self.exporter.open_stream(cfg.output) as stream:
            rows = [
                [i, c.seed, c.R, c.h, c.n_inside, c.n_touching, c.n_anchored, c.zero_node_count]
                for i, c in sorted(censuses.items())
            ]
            self.exporter.write_csv(stream, CENSUS_CSV_COLUMNS, rows)
        self._log_estimate(censuses)
        return 0

    def _log_estimate(self, censuses: Dict[int, NodalCensus]):
        if len(censuses) < 2:
            logger.warning("⚠ At least two samples are needed for an estimate of nu_BS")
            return None
        estimate = estimate_nu([censuses[i] for i in sorted(censuses)])
        logger.info(f"\n✓ nu_hat = {estimate.nu_hat:.6f} ± {estimate.stderr:.6f} "
                    f"({estimate.n_samples} samples)")
        logger.info(f"✓ nu_anchored = {estimate.nu_anchored:.6f} ± {estimate.stderr_anchored:.6f}")
        return estimate

    def _write_estimate(self, stream, censuses: Dict[int, NodalCensus]):
        estimate = self._log_estimate(censuses)
        if estimate is not None:
            self.exporter.write_line(stream, {"type": "estimate", **estimate.to_dict()})

    def run_verify(self) -> int:
        """
        Run a verification suite.

        Returns:
            1 if any report fails, else 0
        """
        cfg = self.run_config
        verifier = Verifier(n_jobs=cfg.threads, batch_size=config.BATCH_SIZE, eps=cfg.eps)

        logger.info(f"\n🧪 Step 1: Running suite '{cfg.suite}'...")
        reports = verifier.run_suite(
            cfg.suite,
            seed=cfg.master_seed,
            r=cfg.r,
            T=cfg.T,
            x0_list=cfg.x0_list,
            n_samples=cfg.n_samples,
            R=cfg.R,
            h=cfg.h,
            count_samples=cfg.count_samples,
            lemma2_samples=cfg.lemma2_samples,
            lemma2_triggering=cfg.lemma2_triggering,
        )

        logger.info("\n💾 Step 2: Writing reports...")
        with self.exporter.open_stream(cfg.output) as stream:
            if cfg.format == "csv":
                rows = [[r.name, r.n_samples, r.statistic, r.target, r.stderr, r.verdict.value] for r in reports]
                self.exporter.write_csv(stream, REPORT_CSV_COLUMNS, rows)
            else:
                self.exporter.write_line(stream, self.exporter.header())
                for report in reports:
                    self.exporter.write_line(stream, {"type": "report", **report.to_dict()})

        failed: List[str] = [r.name for r in reports if r.failed]
        if failed:
            logger.error(f"❌ {len(failed)} check(s) failed: {', '.join(failed)}")
            return 1
        logger.info(f"✓ All {len(reports)} checks completed without failures")
        return 0
