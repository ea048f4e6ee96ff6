"""
Command-line entry point: recovery, reduction, bounds and experiment sweeps.

Exit status is 0 on success, 1 on invalid input or I/O errors and 2 when a
recovery came out degenerate.
"""

import argparse
import asyncio
import logging
import os
import pathlib
import sys
from collections.abc import Sequence
from typing import TypeVar

import mpmath
from pydantic import BaseModel, TypeAdapter, ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table
from sqlalchemy.exc import SQLAlchemyError

from bounds import NoiseModel, bounds_report
from database import load_trial_records, purge_trial_records, store_trial_records
from elo import elo_recover_with_retry
from errors import LatticeRegressionError, ParameterError
from exactnum import format_exact, parse_exact
from harness import (
    SweepResult,
    TrialRecord,
    run_elo_sweep,
    run_lbr_sweep,
    shift_coprimality_rate,
    write_coprimality_csv,
    write_sweep_csv,
)
from lbr import lbr_recover
from lll import lll_reduce
from models import (
    BoundsOutput,
    CoprimalitySpec,
    EloInstanceFile,
    EloSweepSpec,
    LatticeBasisFile,
    LbrInstanceFile,
    LbrSweepSpec,
    ProfileFile,
    RecoveryOutput,
    ReductionOutput,
    StoredRecordOutput,
)
from numtheory import coprimality_density

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGENERATE = 2

DEFAULT_SEED = 0

ModelT = TypeVar("ModelT", bound=BaseModel)


def configure_logging(verbose: bool) -> None:
    """Send logs to stderr through rich; --verbose wins over LATREG_LOG_LEVEL."""
    level_name = "DEBUG" if verbose else os.getenv("LATREG_LOG_LEVEL", "WARNING").upper()
    if not isinstance(logging.getLevelName(level_name), int):
        level_name = "WARNING"
    logging.basicConfig(
        level=level_name,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def read_model(path: str, model: type[ModelT]) -> ModelT:
    return model.model_validate_json(pathlib.Path(path).read_text(encoding="utf-8"))


def write_output(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        pathlib.Path(path).write_text(text, encoding="utf-8")


def resolve_seed(flag: int | None, from_file: int | None) -> int:
    if flag is not None:
        return flag
    return DEFAULT_SEED if from_file is None else from_file


def cmd_recover(args: argparse.Namespace) -> int:
    """Run LBR on a real-valued instance file."""
    instance = read_model(args.input, LbrInstanceFile)
    seed = resolve_seed(args.seed, instance.seed)
    result = lbr_recover(instance.to_input(), seed, args.retry)
    output = RecoveryOutput.build(result.beta_hat, result.trace, result.attempts)
    write_output(args.output, output.model_dump_json(indent=2) + "\n")
    return EXIT_DEGENERATE if result.trace.degenerate else EXIT_OK


def cmd_elo(args: argparse.Namespace) -> int:
    """Run ELO on an integer instance file."""
    instance = read_model(args.input, EloInstanceFile)
    seed = resolve_seed(args.seed, instance.seed)
    result, attempts = elo_recover_with_retry(instance.to_input(), seed, args.retry)
    output = RecoveryOutput.build(result.beta_hat, result.trace, attempts)
    write_output(args.output, output.model_dump_json(indent=2) + "\n")
    return EXIT_DEGENERATE if result.trace.degenerate else EXIT_OK


def cmd_lll_reduce(args: argparse.Namespace) -> int:
    basis = read_model(args.input, LatticeBasisFile).to_basis()
    report = lll_reduce(basis, parse_exact(args.delta))
    output = ReductionOutput.from_report(report)
    write_output(args.output, output.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def _bounds_table(output: BoundsOutput) -> Table:
    table = Table(title="Bounds", show_header=True, header_style="bold cyan")
    table.add_column("Quantity", style="bold")
    table.add_column("Value", justify="right")
    table.add_column("log2", justify="right")

    def approx(text: str | None) -> str:
        if text is None:
            return "inf"
        value = parse_exact(text)
        # values like 2^-44000 sit outside the float range
        return str(mpmath.nstr(mpmath.mpf(value.numerator) / value.denominator, 6))

    table.add_row("ELO required N", approx(output.elo_required_n), "")
    table.add_row("window required N", approx(output.window_required_n), "")
    table.add_row("window max N (log2 1/sigma)", approx(output.window_max_n), "")
    table.add_row("window max N (ln 1/sigma)", approx(output.window_max_n_natural), "")
    table.add_row("window satisfiable", str(output.window_satisfiable), "")
    table.add_row("p threshold", approx(output.p_threshold), "")
    for label, sigma in (
        ("window sigma ceiling", output.window_sigma_ceiling),
        ("info-theoretic sigma ceiling", output.info_sigma_ceiling),
        ("sigma0", output.sigma0),
        ("recoverable below", output.recoverable_below),
        ("impossible above", output.impossible_above),
    ):
        table.add_row(label, approx(sigma.value), approx(sigma.log2))
    if output.lbr_rhs is not None:
        table.add_row(f"LBR condition ({output.model})", str(output.lbr_holds), "")
    return table


def cmd_bounds(args: argparse.Namespace) -> int:
    profile_file = read_model(args.profile, ProfileFile)
    summary = bounds_report(
        profile_file.to_profile(),
        model=NoiseModel(args.model),
        q_hat=profile_file.q_hat,
        r_hat=profile_file.r_hat,
        n_bits=profile_file.n_bits,
    )
    output = BoundsOutput.from_summary(summary)
    if args.output is None:
        Console().print(_bounds_table(output))
    else:
        write_output(args.output, output.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def _emit_sweep(args: argparse.Namespace, kind: str, result: SweepResult) -> None:
    with pathlib.Path(args.output).open("w", encoding="utf-8", newline="") as stream:
        write_sweep_csv(result.rows, stream, timing=args.timing)
    if args.verbose:
        mirror = pathlib.Path(args.output).with_suffix(".records.json")
        mirror.write_bytes(
            TypeAdapter(list[TrialRecord]).dump_json(result.records, indent=2) + b"\n"
        )
    if args.store:
        label = args.label or pathlib.Path(args.spec).stem
        count = asyncio.run(store_trial_records(label, kind, result.records))
        logger.info("stored %d trial records under %r", count, label)


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.kind == "elo":
        elo_spec = read_model(args.spec, EloSweepSpec)
        result = run_elo_sweep(
            elo_spec.p,
            elo_spec.n_list,
            elo_spec.r,
            elo_spec.alpha_list,
            elo_spec.trials,
            resolve_seed(args.seed, elo_spec.seed),
        )
        _emit_sweep(args, "elo", result)
    elif args.kind == "lbr":
        lbr_spec = read_model(args.spec, LbrSweepSpec)
        result = run_lbr_sweep(
            lbr_spec.p,
            lbr_spec.n,
            lbr_spec.r,
            lbr_spec.sigma_list,
            lbr_spec.n_bits_list,
            lbr_spec.trials,
            resolve_seed(args.seed, lbr_spec.seed),
        )
        _emit_sweep(args, "lbr", result)
    else:
        spec = read_model(args.spec, CoprimalitySpec)
        seed = resolve_seed(args.seed, spec.seed)
        checks = [
            (
                "density",
                coprimality_density(
                    spec.q1, spec.q2, spec.q, spec.samples, seed, chunk_size=spec.chunk_size
                ),
            )
        ]
        if spec.shift_p is not None:
            checks.append(
                (
                    "shift",
                    shift_coprimality_rate(
                        spec.shift_p, spec.shift_r_hat, spec.shift_trials, seed
                    ),
                )
            )
        with pathlib.Path(args.output).open("w", encoding="utf-8", newline="") as stream:
            write_coprimality_csv(checks, stream)
        for name, estimate in checks:
            logger.info("%s: %s", name, format_exact(estimate.estimate))
    return EXIT_OK


def cmd_records(args: argparse.Namespace) -> int:
    if args.clear:
        if args.label is not None:
            msg = "--clear deletes every record and does not take --label"
            raise ParameterError(msg)
        removed = asyncio.run(purge_trial_records())
        print(f"deleted {removed} trial records", file=sys.stderr)
        return EXIT_OK
    rows = asyncio.run(load_trial_records(args.label))
    outputs = [StoredRecordOutput.from_record(row.experiment, row.kind, row.to_record()) for row in rows]
    payload = TypeAdapter(list[StoredRecordOutput]).dump_json(outputs, indent=2)
    write_output(args.output, payload.decode() + "\n")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, *, seeded: bool = True) -> None:
    if seeded:
        parser.add_argument(
            "--seed",
            type=int,
            default=None,
            help=f"random seed (default: the file's seed, else {DEFAULT_SEED})",
        )
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="debug logging on stderr"
    )


def _retry_count(text: str) -> int:
    value = int(text)
    if value < 0:
        msg = f"retry count must be >= 0, got {value}"
        raise argparse.ArgumentTypeError(msg)
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latreg",
        description="Exact lattice-based recovery of regression vectors",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in (
        ("recover", cmd_recover, "recover a rational vector from real-valued data (LBR)"),
        ("elo", cmd_elo, "recover an integer vector from integer data (ELO)"),
    ):
        sub = commands.add_parser(name, help=help_text, description=help_text)
        sub.add_argument("--input", required=True, help="instance JSON file")
        sub.add_argument("--output", help="result JSON file (default: stdout)")
        sub.add_argument(
            "--retry",
            type=_retry_count,
            default=0,
            help="extra attempts with derived seeds on degenerate output (default: 0)",
        )
        _add_common(sub)
        sub.set_defaults(handler=handler)

    reduction_help = "LLL-reduce a lattice basis given as rows"
    reduction = commands.add_parser(
        "lll-reduce", help=reduction_help, description=reduction_help
    )
    reduction.add_argument("--input", required=True, help="basis JSON file")
    reduction.add_argument("--output", help="reduced basis JSON file (default: stdout)")
    reduction.add_argument(
        "--delta", default="3/4", help="Lovasz parameter a/b in (1/4, 1) (default: 3/4)"
    )
    _add_common(reduction, seeded=False)
    reduction.set_defaults(handler=cmd_lll_reduce)

    bounds_help = "evaluate sample-size, truncation and noise thresholds"
    bounds = commands.add_parser("bounds", help=bounds_help, description=bounds_help)
    bounds.add_argument("--profile", required=True, help="problem profile JSON file")
    bounds.add_argument(
        "--model",
        choices=[model.value for model in NoiseModel],
        default=NoiseModel.ADVERSARIAL.value,
        help="noise model for the LBR condition (default: adversarial)",
    )
    bounds.add_argument("--output", help="report JSON file (default: table on stdout)")
    _add_common(bounds, seeded=False)
    bounds.set_defaults(handler=cmd_bounds)

    experiment_help = "run a seeded success-rate sweep or coprimality check"
    experiment = commands.add_parser(
        "experiment", help=experiment_help, description=experiment_help
    )
    experiment.add_argument("kind", choices=["elo", "lbr", "coprimality"])
    experiment.add_argument("--spec", required=True, help="sweep spec JSON file")
    experiment.add_argument("--output", required=True, help="result CSV file")
    experiment.add_argument(
        "--timing", action="store_true", help="fill the mean_time_s column"
    )
    experiment.add_argument(
        "--store", action="store_true", help="save trial records to LATREG_DATABASE_URL"
    )
    experiment.add_argument(
        "--label", help="experiment label for --store (default: spec file name)"
    )
    _add_common(experiment)
    experiment.set_defaults(handler=cmd_experiment)

    records_help = "list or delete trial records saved by experiment --store"
    records = commands.add_parser("records", help=records_help, description=records_help)
    records.add_argument("--label", help="only records stored under this experiment label")
    records.add_argument("--output", help="records JSON file (default: stdout)")
    records.add_argument(
        "--clear", action="store_true", help="delete every stored record instead of listing"
    )
    _add_common(records, seeded=False)
    records.set_defaults(handler=cmd_records)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors map to the input-error status, --help to success
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    configure_logging(args.verbose)
    try:
        status: int = args.handler(args)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join(str(part) for part in error["loc"]) or "input"
        print(f"error: {location}: {error['msg']}", file=sys.stderr)
        return EXIT_ERROR
    except (LatticeRegressionError, OSError, SQLAlchemyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return status


if __name__ == "__main__":
    sys.exit(main())
