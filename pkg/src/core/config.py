"""
Configuration module for the nodal domain toolkit.
Loads environment variables and provides configuration constants.
"""
import os
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from src.core.exceptions import ConfigurationError

# Load environment variables from project root
project_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
env_path = os.path.join(project_root, '.env')
load_dotenv(env_path)

# === Numerical Configuration ===
TRUNCATION_EPS = float(os.getenv("TRUNCATION_EPS", "1e-12"))
GRID_STEP = float(os.getenv("GRID_STEP", "0.05"))
LEMMA2_GRID_STEP = float(os.getenv("LEMMA2_GRID_STEP", "0.02"))
SAMPLE_HALF_EXTENT = float(os.getenv("SAMPLE_HALF_EXTENT", "10"))

# === Ensemble Configuration ===
COUNT_RADIUS = float(os.getenv("COUNT_RADIUS", "50"))
COUNT_SAMPLES = int(os.getenv("COUNT_SAMPLES", "200"))
COUNT_MARGIN = float(os.getenv("COUNT_MARGIN", "10"))
VERIFY_SAMPLES = int(os.getenv("VERIFY_SAMPLES", "100000"))
# screening budget; screening stops once LEMMA2_TRIGGERING samples have triggered
LEMMA2_SAMPLES = int(os.getenv("LEMMA2_SAMPLES", "2000000"))
LEMMA2_TRIGGERING = int(os.getenv("LEMMA2_TRIGGERING", "10000"))
MASTER_SEED = int(os.getenv("MASTER_SEED", "7"))
N_THREADS = int(os.getenv("N_THREADS", "1"))
BATCH_SIZE = int(os.getenv("BATCH_SIZE", "4096"))

# === Output Configuration ===
EXPORT_DIR = os.getenv("EXPORT_DIR", "exports")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("LOG_FILE", "nodal_domains.log")
CSV_MAX_NODES = 250_000

# === Printed constants of the lower-bound argument ===
PAPER_R = 3.8
PAPER_T = 3.35
PAPER_AREA_FACTOR = 2.216        # 32 / r^2, rounded down
PAPER_SCALED_THRESHOLD = 3.659   # T / sqrt(1 - J0(r)^2), rounded down
PAPER_HALF_PERIMETER = 2.69      # r / sqrt(2), rounded up
PAPER_NU_BOUND = 1.39e-4

# === Reference values for nu_BS ===
NU_REFERENCE = 0.0589
NU_PERCOLATION = 0.0624
NU_WINDOW = (0.055, 0.062)

# === Verification ===
SIGMA_THRESHOLD = 3.0
MIN_TRIGGERING_SAMPLES = 100


@dataclass
class RunConfig:
    """Parameters of a single CLI run, embedded in every output header."""

    command: str
    master_seed: int = MASTER_SEED
    threads: int = N_THREADS
    output: Optional[str] = None
    format: str = "json"
    r: Optional[float] = None
    T: Optional[float] = None
    mode: str = "exact"
    optimize: bool = False
    R: float = COUNT_RADIUS
    h: float = GRID_STEP
    half_extent: Optional[float] = None
    center: Tuple[float, float] = (0.0, 0.0)
    n_samples: Optional[int] = None
    n_trunc: Optional[int] = None
    index: int = 0
    resume: bool = False
    suite: Optional[str] = None
    x0_list: List[float] = field(default_factory=lambda: [0.0, 1.0, 2.0])
    count_samples: int = COUNT_SAMPLES
    lemma2_samples: int = LEMMA2_SAMPLES
    lemma2_triggering: int = LEMMA2_TRIGGERING
    eps: float = TRUNCATION_EPS

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["center"] = list(self.center)
        return data


def validate_config(run_config: Optional[RunConfig] = None):
    """Validate that configuration values are usable."""
    problems = []
    if not 0.0 < TRUNCATION_EPS < 1.0:
        problems.append("TRUNCATION_EPS must lie in (0, 1)")
    if GRID_STEP <= 0 or LEMMA2_GRID_STEP <= 0:
        problems.append("grid steps must be positive")
    if N_THREADS < 1 or BATCH_SIZE < 1:
        problems.append("N_THREADS and BATCH_SIZE must be >= 1")
    if COUNT_MARGIN < 0:
        problems.append("COUNT_MARGIN must be >= 0")

    if run_config is not None:
        if run_config.threads < 1:
            problems.append("--threads must be >= 1")
        if run_config.h <= 0:
            problems.append("--h must be positive")
        if not 0.0 < run_config.eps < 1.0:
            problems.append("truncation eps must lie in (0, 1)")
        if run_config.n_samples is not None and run_config.n_samples < 1:
            problems.append("--samples must be >= 1")
        if run_config.n_trunc is not None and run_config.n_trunc < 1:
            problems.append("--n-trunc must be >= 1")
        if run_config.R <= 0:
            problems.append("--R must be positive")
        if run_config.count_samples < 1:
            problems.append("--count-samples must be >= 1")
        if run_config.lemma2_samples < 1:
            problems.append("--lemma2-samples must be >= 1")
        if run_config.lemma2_triggering < 0:
            problems.append("--lemma2-triggering must be >= 0")
        if run_config.resume and not run_config.output:
            problems.append("--resume needs --output")
        if run_config.resume and run_config.format == "csv":
            problems.append("--resume reads the NDJSON census stream; it cannot be combined with --format csv")
        if run_config.format not in ("json", "csv", "bin"):
            problems.append("--format must be json, csv or bin")

    if problems:
        raise ConfigurationError(f"Invalid configuration: {'; '.join(problems)}")

    return True
