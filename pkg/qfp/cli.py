"""
Command-line entry point: qfp recip-bench|ode|resources|encode|arith-examples.
"""
import argparse
import json
import logging
import sys
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from qfp import __version__
from qfp.commands.encode import cmd_arith_examples, cmd_encode, format_encoding
from qfp.commands.ode import cmd_ode
from qfp.commands.recip_bench import cmd_recip_bench
from qfp.commands.resources import cmd_resources
from qfp.config import parse_float_list, parse_int_list, settings
from qfp.errors import QfpError
from qfp.formats import ODE_SPLITS, WIDTH_SPLITS, FormatError
from qfp.models import (
    RESOURCE_OPS,
    ConfigError,
    FormatSplit,
    OdeConfig,
    RecipBenchConfig,
    ResourceConfig,
)
from qfp.utils.logger import setup_logging

logger = logging.getLogger(__name__)


def build_splits(
    widths: Optional[str],
    exponents: Optional[str],
    mantissas: Optional[str],
    table: Dict[int, Tuple[int, int]] = WIDTH_SPLITS,
) -> Optional[List[FormatSplit]]:
    """
    Turn the --widths/--exponents/--mantissas flags into format splits.

    Widths alone are looked up in `table`. Exponents and mantissas must come
    together, and with widths present every e + m must equal its width.

    Raises:
        ConfigError: On mismatched list lengths or an inconsistent split
    """
    if widths is None and exponents is None and mantissas is None:
        return None
    if (exponents is None) != (mantissas is None):
        raise ConfigError("--exponents and --mantissas must be given together")

    try:
        if exponents is None:
            return [FormatSplit.for_width(w, table) for w in parse_int_list(widths)]

        es, ms = parse_int_list(exponents), parse_int_list(mantissas)
        if len(es) != len(ms):
            raise ConfigError(f"{len(es)} exponents but {len(ms)} mantissas")
        ws = parse_int_list(widths) if widths is not None else [e + m for e, m in zip(es, ms)]
        if len(ws) != len(es):
            raise ConfigError(f"{len(ws)} widths but {len(es)} exponent/mantissa pairs")
        return [FormatSplit(width=w, e=e, m=m) for w, e, m in zip(ws, es, ms)]
    except (ValueError, ValidationError, FormatError) as err:
        raise ConfigError(f"invalid format split: {err}") from err


def _add_format_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--widths", help="comma-separated register widths, e.g. 10,12,14")
    parser.add_argument("--exponents", help="comma-separated exponent widths")
    parser.add_argument("--mantissas", help="comma-separated mantissa widths")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    parser.add_argument("--backend", choices=["semantic", "gate"], default=None)
    parser.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    parser.add_argument("--out", default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfp",
        description="Quantum floating-point arithmetic simulator and experiment harness.",
    )
    parser.add_argument("--version", action="version", version=f"qfp {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    recip = sub.add_parser("recip-bench", help="reciprocal error benchmark")
    _add_format_flags(recip)
    _add_run_flags(recip)
    recip.add_argument("--samples", type=int, default=None)
    recip.add_argument("--iters", type=int, default=None, help="Newton iterations")
    recip.add_argument("--mean", type=float, default=None)
    recip.add_argument("--stddev", type=float, default=None)

    ode = sub.add_parser("ode", help="trapezoidal ODE integration")
    _add_format_flags(ode)
    _add_run_flags(ode)
    ode.add_argument("--dt", help="comma-separated time steps; powers of two, e.g. 2^-4")
    ode.add_argument("--horizon", type=float, default=None, help="integration horizon in seconds")

    resources = sub.add_parser("resources", help="gate counts of one operation across widths")
    resources.add_argument("op", choices=list(RESOURCE_OPS))
    _add_format_flags(resources)
    resources.add_argument("--iters", type=int, default=None, help="Newton iterations for recip")
    resources.add_argument("--order", type=int, default=None, help="Horner order for exp")
    resources.add_argument("--dump", default=None, help="write the largest circuit's gate list here")
    resources.add_argument("--out", default=None, help="output directory")

    encode = sub.add_parser("encode", help="show the float encoding of a number")
    encode.add_argument("x", type=float)
    encode.add_argument("e", type=int)
    encode.add_argument("m", type=int)
    encode.add_argument("--json", action="store_true", help="print JSON instead of text")

    sub.add_parser("arith-examples", help="fixed-point versus float on small operands")
    return parser


def _overrides(args: argparse.Namespace, names: List[str]) -> dict:
    return {name: getattr(args, flag) for name, flag in names if getattr(args, flag, None) is not None}


def run(args: argparse.Namespace) -> int:
    out_dir = getattr(args, "out", None) or settings.output_dir
    splits = None
    if args.command in ("recip-bench", "ode", "resources"):
        table = ODE_SPLITS if args.command == "ode" else WIDTH_SPLITS
        splits = build_splits(args.widths, args.exponents, args.mantissas, table)
    fields = {"splits": splits} if splits is not None else {}

    if args.command == "recip-bench":
        fields.update(_overrides(args, [
            ("samples", "samples"), ("iterations", "iters"), ("mean", "mean"),
            ("stddev", "stddev"), ("seed", "seed"), ("backend", "backend"), ("workers", "workers"),
        ]))
        report = cmd_recip_bench(RecipBenchConfig(**fields), out_dir)
        for case in report.cases:
            summary = case.errors
            mean_abs = f"{summary.mean_abs:.3e}" if summary and summary.mean_abs is not None else "n/a"
            logger.info(f"width {case.width}: mean |rel err| {mean_abs}, discarded {case.discarded}")

    elif args.command == "ode":
        if args.dt is not None:
            fields["dts"] = parse_float_list(args.dt)
        fields.update(_overrides(args, [
            ("horizon", "horizon"), ("seed", "seed"), ("backend", "backend"), ("workers", "workers"),
        ]))
        report = cmd_ode(OdeConfig(**fields), out_dir)
        for case in report.cases:
            logger.info(f"width {case.width} dt {case.dt}: final l2 rel err {case.final_error:.3e}")

    elif args.command == "resources":
        fields["op"] = args.op
        fields.update(_overrides(args, [("iterations", "iters"), ("order", "order"), ("dump", "dump")]))
        report = cmd_resources(ResourceConfig(**fields), out_dir)
        logger.info(f"Fits: {report.extra.get('fits')}")

    elif args.command == "encode":
        result = cmd_encode(args.x, args.e, args.m)
        print(json.dumps(result, indent=2) if args.json else format_encoding(result))

    elif args.command == "arith-examples":
        print(cmd_arith_examples().to_string(index=False))

    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and map failures to exit code 2."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or settings.log_level)
    logger.debug(f"qfp {__version__}: {args}")

    try:
        return run(args)
    except ValidationError as err:
        logger.error(f"Invalid configuration: {err}")
        return 2
    except QfpError as err:
        logger.error(f"{type(err).__name__}: {err}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
