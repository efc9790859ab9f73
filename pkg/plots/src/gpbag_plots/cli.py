"""Command line front end: gpbag-plot --kind <kind> --in ... --out file.

Inputs are routed by extension: ``.jsonl`` files are run results,
``.csv`` files are generation logs.  Output format follows the --out
extension (png or svg).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from matplotlib import rc_context
from matplotlib.figure import Figure

from .figures import (
    make_beta_tradeoff,
    make_diversity,
    make_elite_heatmap,
    make_evolvability_heatmap,
)
from .io import PlotInputError, read_generation_log, read_results, \
    record_numbers

KINDS = ("beta_tradeoff", "diversity", "elite_heatmap",
         "evolvability_heatmap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpbag-plot",
        description="Render figures from gpbag results and generation logs.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS,
                        help="figure to render")
    parser.add_argument("--in", dest="inputs", required=True,
                        action="append", metavar="FILE",
                        help="input file; repeat for several")
    parser.add_argument("--out", required=True, metavar="FILE",
                        help="output image (.png or .svg)")
    return parser


def _split_inputs(inputs: list[str]) -> tuple[list[Path], list[Path]]:
    """Separate results files from generation logs by extension."""
    results, logs = [], []
    for raw in inputs:
        path = Path(raw)
        if path.suffix == ".jsonl":
            results.append(path)
        elif path.suffix == ".csv":
            logs.append(path)
        else:
            raise PlotInputError(
                f"{path}: unrecognized input type (want .jsonl or .csv)"
            )
    return results, logs


def _shared_n_pop(results: list[Path]) -> int | None:
    """Population size from an optional results file, if it is unique."""
    if not results:
        return None
    records = read_results(results)
    values = set(record_numbers(records, "n_pop").astype(int))
    if len(values) > 1:
        raise PlotInputError(
            "n_pop differs across the given run records; cannot normalize"
        )
    return values.pop()


def make_figure(kind: str, inputs: list[str]) -> Figure:
    results, logs = _split_inputs(inputs)
    if kind == "beta_tradeoff":
        if logs or not results:
            raise PlotInputError(
                "beta_tradeoff takes one or more .jsonl results files"
            )
        return make_beta_tradeoff(read_results(results))

    # the remaining kinds read exactly one generation log
    if len(logs) != 1:
        raise PlotInputError(f"{kind} takes exactly one .csv generation log")
    log = read_generation_log(logs[0])
    if kind == "elite_heatmap":
        if results:
            raise PlotInputError("elite_heatmap takes no .jsonl inputs")
        return make_elite_heatmap(log)
    if len(results) > 1:
        raise PlotInputError(
            f"{kind} takes at most one .jsonl file (for normalization)"
        )
    n_pop = _shared_n_pop(results)
    if kind == "diversity":
        return make_diversity(log, n_pop=n_pop)
    return make_evolvability_heatmap(log, n_pop=n_pop)


def save_figure(fig: Figure, out: str | Path) -> None:
    out = Path(out)
    if out.suffix == ".png":
        fig.savefig(out, dpi=150)
    elif out.suffix == ".svg":
        # pin the hash salt and drop the timestamp so output is repeatable
        with rc_context({"svg.hashsalt": "gpbag-plots"}):
            fig.savefig(out, metadata={"Date": None})
    else:
        raise PlotInputError(f"{out}: unsupported output format "
                             "(want .png or .svg)")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        fig = make_figure(args.kind, args.inputs)
        save_figure(fig, args.out)
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
