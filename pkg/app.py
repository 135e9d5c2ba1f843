"""
Command-line front end for the FS lab.

Every command validates its flags and inputs, runs one engine, and emits a
single JSON report (stdout or --out). Exit codes: 0 ok, 2 invalid input,
3 instance too large, 4 verification mismatch, 5 certificate failure.
"""

import sys
import time
import logging
import argparse
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from modules import __version__
from modules.cache import CensusCache
from modules.certificates import certify_exchange
from modules.config import LabConfig, load_config
from modules.errors import FSLabError, InvalidInputError, VerificationMismatchError
from modules.fs_core import fs_components, fs_is_connected, fs_path, parse_bijection, rank
from modules.graph_io import load_graph, read_graph6_file
from modules.random_lab import ORACLE, PREDICATE, SweepConfig, check_monotone, sweep, threshold_grid
from modules.reports import RunReport, file_digest, write_csv_atomic, write_json_atomic
from modules.theorem_suite import predict, scan_conjectures, verify_corpus

# Configure logging
logger = logging.getLogger(__name__)

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

# (inputs, results, seed, exit code)
Outcome = Tuple[Dict[str, Any], Any, Optional[int], int]


class _TqdmProgress:
    """Adapts the (done, total, fraction) progress callback to a tqdm bar."""

    def __init__(self, desc: str):
        self.desc = desc
        self.bar: Optional[tqdm] = None

    def __call__(self, done: int, total: int, fraction: float) -> None:
        if self.bar is None:
            self.bar = tqdm(total=total, desc=self.desc, file=sys.stderr)
        self.bar.n = done
        self.bar.refresh()

    def close(self) -> None:
        if self.bar is not None:
            self.bar.close()


def _progress(args: argparse.Namespace, desc: str) -> Optional[_TqdmProgress]:
    return _TqdmProgress(desc) if args.progress else None


def _cache(config: LabConfig) -> Optional[CensusCache]:
    return CensusCache(config.cache_dir) if config.cache_dir else None


def _factors(args: argparse.Namespace) -> Tuple[Any, Any, Dict[str, Any]]:
    x, x_echo = load_graph(args.x)
    y, y_echo = load_graph(args.y)
    inputs = {'x': x_echo, 'y': y_echo, 'swap_factors': args.swap_factors}
    if args.swap_factors:
        x, y = y, x
    return x, y, inputs


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_components(args: argparse.Namespace, config: LabConfig) -> Outcome:
    x, y, inputs = _factors(args)
    report = fs_components(x, y, config)
    return inputs, report.to_dict(), None, 0


def cmd_connected(args: argparse.Namespace, config: LabConfig) -> Outcome:
    x, y, inputs = _factors(args)
    return inputs, {'connected': fs_is_connected(x, y, config)}, None, 0


def cmd_path(args: argparse.Namespace, config: LabConfig) -> Outcome:
    x, x_echo = load_graph(args.x)
    y, y_echo = load_graph(args.y)
    sigma = parse_bijection(args.sigma, x.order)
    tau = parse_bijection(args.tau, x.order)
    moves = fs_path(x, y, sigma, tau, config)
    inputs = {'x': x_echo, 'y': y_echo, 'sigma': list(sigma), 'tau': list(tau)}
    results = {
        'reachable': moves is not None,
        'length': None if moves is None else len(moves),
        'moves': None if moves is None else [[a, b] for a, b in moves],
    }
    return inputs, results, None, 0


def cmd_predict(args: argparse.Namespace, config: LabConfig) -> Outcome:
    y, y_echo = load_graph(args.y)
    prediction = predict(y, args.k, config, _cache(config))
    return {'y': y_echo, 'k': args.k}, dict(prediction.to_dict(), n=y.order), None, 0


def cmd_verify(args: argparse.Namespace, config: LabConfig) -> Outcome:
    inputs: Dict[str, Any] = {'n': args.n, 'k': args.k}
    corpus = None
    if args.corpus:
        corpus = read_graph6_file(args.corpus)
        inputs['corpus'] = {'path': args.corpus, 'sha256': file_digest(args.corpus)}
    progress = _progress(args, 'verify')
    try:
        comparisons = verify_corpus(args.n, args.k, corpus, config, _cache(config), progress)
    finally:
        if progress:
            progress.close()
    records = [c.to_dict() for c in comparisons]
    mismatches = [r for r in records if r['mismatch']]
    results = {
        'instances': len(records),
        'mismatches': len(mismatches),
        'unknown': sum(1 for r in records if r['predicted']['verdict'] == 'Unknown'),
        'comparisons': records,
    }
    return inputs, results, None, VerificationMismatchError.exit_code if mismatches else 0


def cmd_conjectures(args: argparse.Namespace, config: LabConfig) -> Outcome:
    report = scan_conjectures(args.n_max, args.k, config, _cache(config))
    results = report.to_dict()
    results['violations'] = report.violations
    code = VerificationMismatchError.exit_code if report.violations else 0
    return {'n_max': args.n_max, 'k': args.k}, results, None, code


def cmd_certify(args: argparse.Namespace, config: LabConfig) -> Outcome:
    x, x_echo = load_graph(args.x)
    sigma = parse_bijection(args.sigma, x.order)
    certificate = certify_exchange(x, args.k, sigma, args.u, args.v)
    inputs = {'x': x_echo, 'k': args.k, 'sigma': list(sigma), 'sigma_rank': rank(sigma), 'u': args.u, 'v': args.v}
    return inputs, certificate.to_dict(), None, 0


def cmd_sweep(args: argparse.Namespace, config: LabConfig) -> Outcome:
    if args.seed is None:
        if config.ci_mode:
            raise InvalidInputError("--seed is required when CI is set")
        args.seed = int(np.random.SeedSequence().entropy)
    if args.p_grid:
        try:
            grid = [float(p) for p in args.p_grid.split(',') if p.strip()]
        except ValueError:
            raise InvalidInputError(f"--p-grid must be comma-separated numbers, got {args.p_grid!r}")
    elif args.factors:
        try:
            grid = threshold_grid(args.n, [float(c) for c in args.factors.split(',') if c.strip()])
        except ValueError:
            raise InvalidInputError(f"--factors must be comma-separated numbers, got {args.factors!r}")
    else:
        raise InvalidInputError("one of --p-grid or --factors is required")

    cfg = SweepConfig(args.n, args.k, tuple(grid), args.trials, args.seed, args.decision)
    progress = _progress(args, 'sweep')
    try:
        result = sweep(cfg, config, progress=progress)
    finally:
        if progress:
            progress.close()

    if args.out and args.out.endswith('.csv'):
        write_csv_atomic(args.out, result.to_frame())
        args.out = None
    results = result.to_dict()
    results['monotonicity_violations'] = check_monotone(result)
    inputs = {'n': args.n, 'k': args.k, 'p_grid': list(cfg.p_grid), 'trials': args.trials, 'decision': result.decision}
    return inputs, results, args.seed, 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, LabConfig], Outcome]] = {
    'components': cmd_components,
    'connected': cmd_connected,
    'path': cmd_path,
    'predict': cmd_predict,
    'verify': cmd_verify,
    'conjectures': cmd_conjectures,
    'certify': cmd_certify,
    'sweep': cmd_sweep,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return value


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads', type=_positive_int, help='worker count (default: FS_THREADS or 1)')
    common.add_argument('--max-n', type=_positive_int, help='largest order the oracle accepts (<= 12)')
    common.add_argument('--memory-budget-mb', type=float, help='memory cap for visited sets in MiB')
    common.add_argument('--cache-dir', help='directory for the census cache')
    common.add_argument('--out', help='write the report here instead of stdout')
    common.add_argument('--log-level', choices=LOG_LEVELS, help='logging level (default: FS_LOG_LEVEL or WARNING)')
    common.add_argument('--verbose', action='store_true', help='shorthand for --log-level INFO')
    common.add_argument('--progress', action='store_true', help='show a progress bar on stderr')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog='fs', description='Friends-and-strangers graph verification lab.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    for name, help_text in (('components', 'exact component census of FS(X, Y)'),
                            ('connected', 'is FS(X, Y) connected')):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument('--x', required=True, help='position graph: named spec or file')
        p.add_argument('--y', required=True, help='token graph: named spec or file')
        p.add_argument('--swap-factors', action='store_true', help='compute FS(Y, X) instead')

    p = sub.add_parser('path', parents=[common], help='shortest swap sequence between two bijections')
    p.add_argument('--x', required=True)
    p.add_argument('--y', required=True)
    p.add_argument('--sigma', required=True, help='rank or comma-separated permutation')
    p.add_argument('--tau', required=True, help='rank or comma-separated permutation')

    p = sub.add_parser('predict', parents=[common], help='theorem-based connectivity verdict')
    p.add_argument('--y', required=True)
    p.add_argument('--k', type=_positive_int, required=True)

    p = sub.add_parser('verify', parents=[common], help='compare predictions with the oracle on a corpus')
    p.add_argument('--n', type=_positive_int, required=True)
    p.add_argument('--k', type=_positive_int, required=True)
    p.add_argument('--corpus', help='graph6 file (default: all connected graphs on n vertices)')

    p = sub.add_parser('conjectures', parents=[common], help='scan the open conjectures')
    p.add_argument('--n-max', type=_positive_int, required=True)
    p.add_argument('--k', type=_positive_int, required=True)

    p = sub.add_parser('certify', parents=[common], help='constructive exchange certificate')
    p.add_argument('--x', required=True)
    p.add_argument('--k', type=_positive_int, required=True)
    p.add_argument('--sigma', required=True)
    p.add_argument('--u', type=int, required=True)
    p.add_argument('--v', type=int, required=True)

    p = sub.add_parser('sweep', parents=[common], help='Monte-Carlo connectivity sweep over G(n, p)')
    p.add_argument('--n', type=_positive_int, required=True)
    p.add_argument('--k', type=_positive_int, required=True)
    grid = p.add_mutually_exclusive_group()
    grid.add_argument('--p-grid', help='comma-separated ascending probabilities')
    grid.add_argument('--factors', help='comma-separated c values for p = c ln(n)/n')
    p.add_argument('--trials', type=_positive_int, default=100)
    p.add_argument('--seed', type=int, help='root seed (required when CI is set)')
    mode = p.add_mutually_exclusive_group()
    mode.add_argument('--oracle', dest='decision', action='store_const', const=ORACLE)
    mode.add_argument('--predicate', dest='decision', action='store_const', const=PREDICATE)
    return parser


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _configure_logging(config: LabConfig, args: argparse.Namespace) -> None:
    level = 'INFO' if args.verbose else (args.log_level or config.log_level)
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.WARNING))


def _emit(report: RunReport, out: Optional[str]) -> None:
    if out:
        write_json_atomic(out, report.to_dict())
    else:
        sys.stdout.write(report.to_json() + '\n')


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse argv, run one command and emit its report.

    Returns:
        int: Process exit code
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    start = time.perf_counter()
    try:
        config = load_config(
            threads=args.threads,
            max_n=args.max_n,
            memory_budget_mb=args.memory_budget_mb,
            cache_dir=args.cache_dir,
            log_level=args.log_level,
        )
        _configure_logging(config, args)
        inputs, results, seed, code = COMMANDS[args.command](args, config)
    except FSLabError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code

    report = RunReport(
        command=['fs'] + argv,
        inputs=inputs,
        results=results,
        elapsed_ms=round((time.perf_counter() - start) * 1000, 3),
        version=__version__,
        seed=seed,
        config=config.to_dict(),
    )
    try:
        _emit(report, args.out)
    except OSError as e:
        sys.stderr.write(f"error: cannot write report: {e}\n")
        return InvalidInputError.exit_code
    return code


if __name__ == '__main__':
    sys.exit(main())
