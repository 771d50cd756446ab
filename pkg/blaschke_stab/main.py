from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from blaschke_stab import __version__
from blaschke_stab.cli.commands import COMMANDS, CommandContext
from blaschke_stab.core.config import load_settings
from blaschke_stab.core.errors import InvariantViolation, StabilityError

logger = logging.getLogger("blaschke_stab")

CSV_COLUMNS = """\
output columns:
  scan          n, points, logV, mu, logM, method
  sandwich      p, eps, R, alpha, K, q, lower_log, upper_log, upper_certified_log,
                phi_eps, n0, witness_lower, witness_upper, lower_exact, method, seed, flag
  interp-check  function, p, nodes, grid_points, norm_bound, max_violation, passed
  eta           k, start, length, mass, min_log_eta, max_log_eta, max_log_ratio
  harmonic      arcs, measure, eps, R, p, omega_min, omega_min_theta, lower, upper

exit codes: 0 ok, 2 usage or invalid input, 3 invariant violation, 4 budget exceeded
"""


def _positive_int(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="seed for every stochastic search (default BSTAB_SEED)")
    common.add_argument("--out", type=Path, help="output directory (default BSTAB_OUTPUT_DIR)")
    common.add_argument("--budget", type=_positive_int, help="exhaustive enumeration limit")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    return common


def _scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", required=True, help="pack name, scenario kind or point-set file")
    parser.add_argument("--r", type=float, help="compact grid radius")
    parser.add_argument("--mesh", type=float, help="compact grid spacing")
    parser.add_argument("--sigma", type=float, help="Stolz aperture")
    parser.add_argument("--count", type=_positive_int, help="points per Stolz angle or on the ray")
    parser.add_argument("--angle", type=float, help="radial direction")
    parser.add_argument("--vertex", type=float, action="append", help="Stolz vertex angle (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blaschke-stab",
        description="Stability bounds for recovering bounded analytic functions from a set E.",
        epilog=CSV_COLUMNS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    scan = sub.add_parser("scan", parents=[common], help="Fekete-type scan over n = 1..nmax")
    _scenario_args(scan)
    scan.add_argument("--nmax", type=_positive_int)
    scan.add_argument("--mode", choices=["exact", "heuristic"])

    sw = sub.add_parser("sandwich", parents=[common], help="two-sided stability bounds per eps")
    _scenario_args(sw)
    sw.add_argument("--eps", action="append", help="comma-separated eps values (repeatable)")
    sw.add_argument("--R", type=float, help="recovery radius; 0 recovers at the origin only")
    sw.add_argument("--p", help="Hardy exponent in [1, inf]")
    sw.add_argument("--nmax", type=_positive_int)
    sw.add_argument("--mode", choices=["exact", "heuristic"])

    ic = sub.add_parser("interp-check", parents=[common], help="interpolation error bound on test functions")
    _scenario_args(ic)
    ic.add_argument("--function", help="test function id (default: all)")
    ic.add_argument("--p", help="Hardy exponent (default: 1, 2 and inf)")
    ic.add_argument("--grid", type=_positive_int, help="evaluation grid size")
    ic.add_argument("--nodes", type=_positive_int, help="number of interpolation nodes")

    eta = sub.add_parser("eta", parents=[common], help="blockwise eta sequence of a radial set")
    _scenario_args(eta)
    eta.add_argument("--k-max", dest="k_max", type=_positive_int)
    eta.add_argument("--function", help="test function id (default half_shift)")

    hm = sub.add_parser("harmonic", parents=[common], help="bounds from harmonic measure of boundary arcs")
    hm.add_argument("--arc", action="append", help="start,end in radians (repeatable)")
    hm.add_argument("--eps", action="append", required=True)
    hm.add_argument("--R", type=float)
    hm.add_argument("--p")

    gen = sub.add_parser("gen", parents=[common], help="write a scenario to a point-set file")
    _scenario_args(gen)
    return parser


def _configure_logging(level: str, verbose: bool) -> None:
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logger.setLevel(logging.DEBUG if verbose else getattr(logging, level, logging.WARNING))


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        settings = load_settings()
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _configure_logging(settings.log_level, args.verbose)

    try:
        ctx = CommandContext.from_settings(settings, args.out)
        COMMANDS[args.command](ctx, args)
    except StabilityError as exc:
        logger.error("%s failed: %s", args.command, exc)
        if isinstance(exc, InvariantViolation):
            for violation in exc.violations:
                logger.error("  %s", violation)
        return exc.exit_code
    except ValueError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
