#!/usr/bin/env python

"""treemap-growth command line interface."""

import logging
import sys

from pathlib import Path
from traceback import print_exception
from typing import List, NamedTuple, Optional

import click

from click.core import Context
from crashvb_logging_utilities import (
    LOGGING_DEFAULT,
    logging_options,
    set_log_levels,
)

from .consts import EXIT_BAND_VIOLATION, EXIT_ERROR, EXIT_OK, EXIT_USAGE
from .estimation_harness import compare_results, run_configured
from .helpers.config_helper import (
    BOUNDARY_MODES,
    EXPERIMENTS,
    GRAPH_KINDS,
    build_config,
)
from .helpers.rng_helper import RngStream
from .mated_crt import PairKind, build_graph, format_graph, generate_walk_pair
from .mullin_codec import decode, format_walk, sample_boundary_excursion
from .planar_map import format_map
from .subcommands.verify import SUITES, VerifyOptions, run_suite

LOGGER = logging.getLogger(__name__)


class TypingContextObject(NamedTuple):
    # pylint: disable=missing-class-docstring
    verbosity: int


def get_context_object(*, context: Context) -> TypingContextObject:
    """Wrapper method to enforce type checking."""
    return context.obj


def _fail(ctx: TypingContextObject, exception: Exception):
    if ctx.verbosity > 0:
        logging.fatal(exception)
    if ctx.verbosity > LOGGING_DEFAULT:
        exc_info = sys.exc_info()
        print_exception(*exc_info)
    sys.exit(EXIT_ERROR)


def _emit(text: str, output: Optional[Path]):
    if output is None:
        click.echo(text, nl=False)
    else:
        output.write_text(text, encoding="utf-8")
        LOGGER.info("Wrote %s.", output)


@click.group()
@logging_options
@click.pass_context
def cli(context: Context, verbosity):
    """Growth processes on spanning-tree-weighted planar maps."""

    if verbosity is None:
        verbosity = LOGGING_DEFAULT

    set_log_levels(verbosity)

    context.obj = TypingContextObject(verbosity=verbosity)


@cli.command(name="run", short_help="Runs an exponent experiment.")
@click.option(
    "--config",
    "config_path",
    help="Flat key=value file; command line options take precedence.",
    type=click.Path(dir_okay=False, exists=True, path_type=Path),
)
@click.option("--experiment", help="Experiment to run.", type=click.Choice(EXPERIMENTS))
@click.option("--sizes", help="Size grid, e.g. 8,16,32 or 32,64,...,1024.")
@click.option("--trials", help="Trials per size.", type=int)
@click.option("--seed", help="Master seed.", type=int)
@click.option(
    "--out",
    help="Output directory.",
    type=click.Path(file_okay=False, path_type=Path),
)
@click.option(
    "--buffer-ratio", help="Initial window buffer over core length.", type=float
)
@click.option(
    "--max-buffer-ratio",
    help="Buffer ratio at which a window is given up.",
    type=float,
)
@click.option(
    "--harmonic-margin",
    help="Smallest far-target distance over cluster diameter.",
    type=float,
)
@click.option("--steps-per-unit", help="Walk steps per mated-CRT cell.", type=int)
@click.option("--threads", help="Worker processes.", type=int)
@click.option(
    "--window-factor",
    help="Window length over the natural size scale.",
    type=float,
)
@click.option(
    "--max-window-factor",
    help="Largest DLA window factor tried before a trial fails.",
    type=float,
)
@click.option(
    "--discard-fraction",
    help="Share of the smallest sizes left out of the fit.",
    type=float,
)
@click.option(
    "--boundary",
    help="Boundary of finite maps.",
    type=click.Choice(BOUNDARY_MODES),
)
@click.option(
    "--graph", help="Graph used for ball growth.", type=click.Choice(GRAPH_KINDS)
)
@click.option(
    "--failure-limit",
    help="Largest tolerated share of failed trials per size.",
    type=float,
)
@click.option("--trace/--no-trace", default=None, help="Write per-step DLA traces.")
@click.pass_context
def run(context: Context, config_path: Optional[Path], **overrides):
    """Runs an experiment and writes its result files below --out."""
    ctx = get_context_object(context=context)
    passed = None
    try:
        config = build_config(path=config_path, overrides=overrides)
        result = run_configured(config)
        passed = result.passed
        if result.fit is not None:
            fit = result.fit
            click.echo(
                f"{config.experiment}: slope {fit.slope:.4f} "
                f"+/- {fit.stderr_slope:.4f} "
                f"({'pass' if result.passed else 'FAIL'})"
            )
    except Exception as exception:  # pylint: disable=broad-except
        _fail(ctx, exception)
    if passed is False:
        context.exit(EXIT_BAND_VIOLATION)


@cli.command(name="verify", short_help="Runs a verification suite.")
@click.option(
    "--suite",
    default="exact",
    help="Suite to run.",
    show_default=True,
    type=click.Choice(sorted(SUITES)),
)
@click.option(
    "--seed",
    default=VerifyOptions().seed,
    help="Master seed.",
    show_default=True,
    type=int,
)
@click.option(
    "--max-edges",
    default=VerifyOptions().max_edges,
    help="Largest map size enumerated.",
    show_default=True,
    type=click.IntRange(1, 5),
)
@click.option(
    "--samples",
    default=VerifyOptions().samples,
    help="Samples per side of the statistical checks.",
    show_default=True,
    type=click.IntRange(min=1),
)
@click.option(
    "--pitman-pairs",
    default=VerifyOptions().pitman_pairs,
    help="Random walk pairs checked against the Pitman identity.",
    show_default=True,
    type=click.IntRange(min=1),
)
@click.pass_context
def verify(context: Context, suite: str, **options):
    """Runs exhaustive or statistical checks and prints one line per check."""
    ctx = get_context_object(context=context)
    failed = False
    try:
        checks = run_suite(suite, VerifyOptions(**options))
        for check in checks:
            verdict = "PASS" if check.passed else "FAIL"
            click.echo(f"{verdict} {check.name}: {check.detail}")
        failed = not all(check.passed for check in checks)
    except Exception as exception:  # pylint: disable=broad-except
        _fail(ctx, exception)
    if failed:
        context.exit(EXIT_ERROR)


@cli.command(name="compare", short_help="Cross-checks finished experiments.")
@click.option(
    "--dla",
    help="Results directory of a dla-diameter run.",
    type=click.Path(exists=True, path_type=Path),
)
@click.option(
    "--lerw",
    help="Results directory of a lerw-diameter run.",
    type=click.Path(exists=True, path_type=Path),
)
@click.option(
    "--chi",
    help="Results directory of a chi run.",
    type=click.Path(exists=True, path_type=Path),
)
@click.option(
    "--ball",
    help="Results directory of a ball-volume run.",
    type=click.Path(exists=True, path_type=Path),
)
@click.pass_context
def compare(context: Context, **results):
    """Compares DLA with LERW slopes and chi with one over the ball-growth slope."""
    ctx = get_context_object(context=context)
    failed = False
    try:
        comparisons = compare_results(**results)
        for comparison in comparisons:
            verdict = "PASS" if comparison.passed else "FAIL"
            click.echo(f"{verdict} {comparison.name}: {comparison.detail}")
        failed = not all(comparison.passed for comparison in comparisons)
    except Exception as exception:  # pylint: disable=broad-except
        _fail(ctx, exception)
    if failed:
        context.exit(EXIT_BAND_VIOLATION)


@cli.command(name="sample-map", short_help="Samples a decorated map.")
@click.option(
    "--edges", required=True, help="Total edge count.", type=click.IntRange(min=0)
)
@click.option(
    "--boundary",
    default=0,
    help="Boundary length.",
    show_default=True,
    type=click.IntRange(min=0),
)
@click.option("--seed", default=42, help="Seed.", show_default=True, type=int)
@click.option(
    "--walk/--no-walk",
    default=False,
    help="Also print the encoding walk.",
    show_default=True,
)
@click.option(
    "--output",
    help="Output file.",
    type=click.Path(dir_okay=False, path_type=Path),
)
@click.pass_context
def sample_map(
    context: Context,
    edges: int,
    boundary: int,
    seed: int,
    walk: bool,
    output: Optional[Path],
):
    # pylint: disable=too-many-arguments,too-many-positional-arguments
    """Samples a uniform spanning-tree-decorated map and prints it as a MAP record."""
    ctx = get_context_object(context=context)
    try:
        rng = RngStream(seed=seed, stream_id=0).generator()
        excursion = sample_boundary_excursion(edges, boundary, rng)
        decorated = decode(excursion)
        text = format_map(
            decorated.map,
            tree_edges=decorated.tree_edges,
            external_face=decorated.external_face,
        )
        if walk:
            text = format_walk(excursion) + text
        _emit(text, output)
    except Exception as exception:  # pylint: disable=broad-except
        _fail(ctx, exception)


@cli.command(name="sample-mated-crt", short_help="Samples a mated-CRT map.")
@click.option(
    "--cells", required=True, help="Number of cells.", type=click.IntRange(min=1)
)
@click.option(
    "--steps-per-unit",
    default=1,
    help="Walk steps per cell.",
    show_default=True,
    type=click.IntRange(min=1),
)
@click.option(
    "--kind",
    default=PairKind.FREE.value,
    help="Law of the walk pair.",
    show_default=True,
    type=click.Choice([PairKind.FREE.value, PairKind.QUADRANT_CONDITIONED.value]),
)
@click.option("--seed", default=42, help="Seed.", show_default=True, type=int)
@click.option(
    "--output",
    help="Output file.",
    type=click.Path(dir_okay=False, path_type=Path),
)
@click.pass_context
def sample_mated_crt(
    context: Context,
    cells: int,
    steps_per_unit: int,
    kind: str,
    seed: int,
    output: Optional[Path],
):
    # pylint: disable=too-many-arguments,too-many-positional-arguments
    """Samples a mated-CRT map and prints its edge list."""
    ctx = get_context_object(context=context)
    try:
        pair = generate_walk_pair(
            PairKind(kind),
            cells * steps_per_unit,
            RngStream(seed=seed, stream_id=0).generator(),
            steps_per_unit=steps_per_unit,
        )
        _emit(format_graph(build_graph(pair, steps_per_unit)), output)
    except Exception as exception:  # pylint: disable=broad-except
        _fail(ctx, exception)


@cli.command()
def version():
    """Displays the version."""

    # Note: * This cannot be imported above, as it causes a circular import!
    #       * This requires '__version__' to be defined in '__init__.py'
    from . import __version__  # pylint: disable=import-outside-toplevel

    print(__version__)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Console entry point.

    Returns:
        0 on success, 2 when a fitted exponent leaves its acceptance band, 64 on
        usage errors and 1 on any other error.
    """
    try:
        # Without standalone mode, click returns the code passed to Context.exit().
        result = cli.main(args=argv, prog_name="treemap-growth", standalone_mode=False)
    except click.UsageError as exception:
        exception.show()
        return EXIT_USAGE
    except click.ClickException as exception:
        exception.show()
        return EXIT_ERROR
    except click.exceptions.Abort:
        return EXIT_ERROR
    except SystemExit as exception:
        return exception.code if isinstance(exception.code, int) else EXIT_ERROR
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
