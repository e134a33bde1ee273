"""
Main entry point for the nodal domain toolkit.
"""

import argparse
import os
import sys
import logging
from typing import List, Optional

# Fix Unicode encoding issues on Windows
if sys.platform == 'win32':
    import codecs
    sys.stdout = codecs.getwriter('utf-8')(sys.stdout.buffer, 'strict')
    sys.stderr = codecs.getwriter('utf-8')(sys.stderr.buffer, 'strict')

# Add project root to path
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

from src import __version__
from src.core import config
from src.core.config import RunConfig
from src.core.exceptions import ConfigurationError, GeometryError, OutOfDomainError
from src.core.orchestrator import CENSUS_CSV_COLUMNS, Orchestrator
from src.wave.verifier import SUITES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SEED_HELP = """\
Reproducibility: sample i of master seed S uses
  sample_seed = numpy.random.SeedSequence(S, spawn_key=(i,)).generate_state(1, numpy.uint64)[0]
and draws X_0, X_1, Y_1, X_2, Y_2, ... from numpy.random.Generator(numpy.random.Philox(sample_seed)).
Any single sample can therefore be regenerated without the rest of the ensemble."""


def configure_logging():
    """Configure logging once: stderr (stdout carries data) plus an optional log file."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if config.LOG_FILE:
        handlers.append(logging.FileHandler(config.LOG_FILE, encoding='utf-8'))
    logging.basicConfig(
        level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _center(text: str):
    try:
        x, y = (float(v) for v in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'x,y'")
    return x, y


def _x0_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with the four subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=config.MASTER_SEED, help='master seed (default: %(default)s)')
    common.add_argument('--threads', type=int, default=config.N_THREADS, help='sample-level parallelism')
    common.add_argument('--output', default=None, help='output path (default: stdout; rasters go to EXPORT_DIR)')
    common.add_argument('--format', choices=('json', 'csv', 'bin'), default='json', help='output format')

    parser = argparse.ArgumentParser(
        prog='nodal-domains',
        description='Nodal domains of the random monochromatic plane wave.',
        epilog=SEED_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)

    bound = subparsers.add_parser(
        'bound', parents=[common], help='evaluate or optimise the lower bound on nu_BS',
        description='Evaluate the lower bound at (r, T) or search its maximum. '
                    'CSV columns: ' + ','.join(('r', 'T', 'mode', 'alpha', 'j0_r', 'psi_T', 'psi_scaled',
                                                 'circle_prob_lb', 'nu_lb', 'area_factor',
                                                 'scaled_threshold', 'half_perimeter')),
    )
    bound.add_argument('--r', type=float, default=None, help=f'circle radius (default {config.PAPER_R})')
    bound.add_argument('--T', type=float, default=None, help=f'threshold (default {config.PAPER_T})')
    bound.add_argument('--mode', choices=('exact', 'paper'), default='exact',
                       help='exact precision or the printed rounded factors')
    bound.add_argument('--optimize', action='store_true', help='search (r, T) for the largest bound')

    sample = subparsers.add_parser(
        'sample', parents=[common], help='write the raster of one ensemble member',
        description='Write one sample as float32 little-endian .bin + .json sidecar, '
                    'or as CSV (columns x,y,value) for small grids.',
        epilog=SEED_HELP, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sample.add_argument('--h', type=float, default=config.GRID_STEP, help='grid step')
    sample.add_argument('--half-extent', type=float, default=None,
                        help=f'half side of the square (default {config.SAMPLE_HALF_EXTENT:g})')
    sample.add_argument('--center', type=_center, default=(0.0, 0.0), help="grid centre 'x,y'")
    sample.add_argument('--n-trunc', type=int, default=None, help='override the truncation order')
    sample.add_argument('--index', type=int, default=0, help='sample index within the ensemble')

    count = subparsers.add_parser(
        'count', parents=[common], help='count nodal domains and estimate nu_BS',
        description='Stream one census per sample (NDJSON) and a final estimate. '
                    'CSV columns: ' + ','.join(CENSUS_CSV_COLUMNS),
        epilog=SEED_HELP, formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    count.add_argument('--R', type=float, default=config.COUNT_RADIUS, help='counting radius')
    count.add_argument('--h', type=float, default=config.GRID_STEP, help='grid step')
    count.add_argument('--samples', type=int, default=config.COUNT_SAMPLES, help='ensemble size')
    count.add_argument('--n-trunc', type=int, default=None, help='override the truncation order')
    count.add_argument('--resume', action='store_true', help='keep the censuses already in --output')

    verify = subparsers.add_parser(
        'verify', parents=[common], help='run verification checks',
        description='Run a suite of checks; exits 1 if any report fails. '
                    'CSV columns: name,n_samples,statistic,target,stderr,verdict',
    )
    verify.add_argument('--suite', choices=SUITES, default='full', help='checks to run')
    verify.add_argument('--r', type=float, default=None, help='circle radius')
    verify.add_argument('--T', type=float, default=None, help='threshold of the circle bound')
    verify.add_argument('--samples', type=int, default=None, help='Monte Carlo size of the circle checks')
    verify.add_argument('--x0', type=_x0_list, default=[0.0, 1.0, 2.0], help='conditioned X_0 values, e.g. 0,1,2')
    verify.add_argument('--R', type=float, default=config.COUNT_RADIUS, help='counting radius of the counting checks')
    verify.add_argument('--h', type=float, default=config.GRID_STEP, help='grid step of the counting checks')
    verify.add_argument('--count-samples', type=int, default=config.COUNT_SAMPLES,
                        help='counting ensemble size of the counting checks')
    verify.add_argument('--lemma2-samples', type=int, default=config.LEMMA2_SAMPLES,
                        help='screening budget of the containment check')
    verify.add_argument('--lemma2-triggering', type=int, default=config.LEMMA2_TRIGGERING,
                        help='triggering samples after which containment screening stops (0 = whole budget)')
    return parser


def to_run_config(args: argparse.Namespace) -> RunConfig:
    """Translate parsed arguments into a RunConfig."""
    run_config = RunConfig(
        command=args.command,
        master_seed=args.seed,
        threads=args.threads,
        output=args.output,
        format=args.format,
    )
    if args.command == 'bound':
        run_config.r, run_config.T = args.r, args.T
        run_config.mode, run_config.optimize = args.mode, args.optimize
    elif args.command == 'sample':
        run_config.h, run_config.half_extent = args.h, args.half_extent
        run_config.center, run_config.n_trunc, run_config.index = args.center, args.n_trunc, args.index
    elif args.command == 'count':
        run_config.R, run_config.h, run_config.n_samples = args.R, args.h, args.samples
        run_config.n_trunc, run_config.resume = args.n_trunc, args.resume
    elif args.command == 'verify':
        run_config.suite, run_config.r, run_config.T = args.suite, args.r, args.T
        run_config.n_samples, run_config.x0_list = args.samples, args.x0
        run_config.R, run_config.h, run_config.count_samples = args.R, args.h, args.count_samples
        run_config.lemma2_samples, run_config.lemma2_triggering = args.lemma2_samples, args.lemma2_triggering
    return run_config


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        0 on success, 1 on domain errors or failed checks, 2 on usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help / --version exit 0, usage errors exit 2
        return int(e.code or 0)

    configure_logging()
    run_config = to_run_config(args)

    # Validate configuration
    try:
        config.validate_config(run_config)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return Orchestrator(run_config).run()
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OutOfDomainError, GeometryError) as e:
        logger.error(f"Domain error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.warning("Interrupted; completed censuses remain in the output file")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
