"""Command-line front end.

Subcommands: ``run`` (execute one experiment), ``summarize`` (median/IQR
tables from a results file), ``compare`` (rank tests across modes),
``fetch`` (download and convert a benchmark dataset), ``match-budget``
(budget-matched evaluation count for single-output baselines).

``run`` settings come from flags, then a JSON config file (``--config``),
then built-in defaults, in that order of precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import MODES, RunConfig, match_budget
from .harness import (
    ExperimentSpec,
    HarnessError,
    compare_modes,
    format_summary,
    read_results,
    run_experiment,
    summarize,
)
from .selection import SelectionScheme
from . import uci

RUN_DEFAULTS = {
    "task": None,
    "mode": "segp",
    "beta": None,
    "pop_size": 500,
    "generations": 100,
    "runs": 1,
    "seed": 0,
    "test_fraction": 0.3,
    "use_scaling": True,
    "selection": None,
    "tournament_size": 8,
    "log_diversity": False,
    "log_evolvability": False,
    "data_dir": "data",
    "fetch_missing": False,
    "jobs": 1,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpbag",
        description="Bagging ensembles of expression trees, evolved in one run.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment")
    p_run.add_argument("--dataset", required=True,
                       help="dataset name (see 'fetch') or CSV path")
    p_run.add_argument("--task", choices=["regression", "classification"])
    p_run.add_argument("--mode", choices=list(MODES))
    p_run.add_argument("--beta", type=int, help="bootstrap samples / ensemble slots")
    p_run.add_argument("--pop-size", type=int, dest="pop_size")
    p_run.add_argument("--generations", type=int)
    p_run.add_argument("--runs", type=int, help="independent repetitions")
    p_run.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    p_run.add_argument("--test-fraction", type=float, dest="test_fraction")
    p_run.add_argument("--no-linear-scaling", action="store_false",
                       dest="use_scaling", default=None)
    p_run.add_argument("--selection",
                       choices=["partitioned", "trunc-pwb", "trunc-pwl",
                                "tourn-pwb", "tourn-pwl"])
    p_run.add_argument("--tournament-size", type=int, choices=[4, 8],
                       dest="tournament_size")
    p_run.add_argument("--log-diversity", action="store_true",
                       dest="log_diversity", default=None)
    p_run.add_argument("--log-evolvability", action="store_true",
                       dest="log_evolvability", default=None)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--config", help="JSON file with default settings")
    p_run.add_argument("--data-dir", dest="data_dir",
                       help="directory of fetched dataset CSVs")
    p_run.add_argument("--fetch-missing", action="store_true",
                       dest="fetch_missing", default=None,
                       help="download named datasets that are not cached")
    p_run.add_argument("--jobs", type=int, help="parallel worker processes")

    p_sum = sub.add_parser("summarize", help="median/IQR table from results")
    p_sum.add_argument("--in", dest="in_path", required=True,
                       help="experiment directory or results.jsonl path")

    p_cmp = sub.add_parser("compare", help="rank-test modes against each other")
    p_cmp.add_argument("--in", dest="in_path", required=True)
    p_cmp.add_argument("--alpha", type=float, default=0.05)
    p_cmp.add_argument("--higher-is-better", action="store_true",
                       help="treat metrics as accuracies instead of errors")

    p_fetch = sub.add_parser("fetch", help="download a benchmark dataset")
    p_fetch.add_argument("--name", required=True,
                         help=f"one of: {', '.join(uci.dataset_names())}")
    p_fetch.add_argument("--out", required=True, help="destination directory")
    p_fetch.add_argument("--url", help="override the registry URL")

    p_mb = sub.add_parser("match-budget",
                          help="evaluation budget for a matched baseline")
    p_mb.add_argument("--beta", type=int, required=True)
    p_mb.add_argument("--ell", type=int, required=True,
                      help="assumed mean tree size")
    p_mb.add_argument("--generations", type=int, required=True)
    p_mb.add_argument("--pop-size", type=int, required=True, dest="pop_size")
    return parser


def _merged_run_settings(args: argparse.Namespace) -> dict:
    settings = dict(RUN_DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(RUN_DEFAULTS)
        if unknown:
            raise ValueError(
                f"unknown config keys: {', '.join(sorted(unknown))}"
            )
        settings.update(loaded)
    for key in RUN_DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _cmd_run(args: argparse.Namespace) -> int:
    s = _merged_run_settings(args)
    selection = None
    if s["selection"] is not None:
        selection = SelectionScheme(
            kind=s["selection"], tournament_size=s["tournament_size"]
        )
    elif s["mode"] in ("cgp", "siel"):
        selection = SelectionScheme(
            kind="plain-tournament", tournament_size=s["tournament_size"]
        )
    cfg = RunConfig(
        mode=s["mode"],
        n_pop=s["pop_size"],
        generations=s["generations"],
        beta=s["beta"],
        use_scaling=s["use_scaling"],
        selection=selection,
        test_fraction=s["test_fraction"],
        seed=s["seed"],
        log_elites=s["log_diversity"] or s["log_evolvability"],
        log_diversity=s["log_diversity"],
        log_evolvability=s["log_evolvability"],
    )
    spec = ExperimentSpec(
        datasets=[args.dataset],
        out_dir=args.out,
        modes=[s["mode"]],
        n_runs=s["runs"],
        base_seed=s["seed"],
        config=cfg,
        task=s["task"],
        data_dir=s["data_dir"],
        fetch_missing=s["fetch_missing"],
        jobs=s["jobs"],
    )
    try:
        results = run_experiment(spec)
    except HarnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for r in results:
        print(
            f"{r.dataset} {r.mode} seed={r.seed} "
            f"train={r.train_metric:.6g} test={r.test_metric:.6g} "
            f"members={r.pruned_size} time={r.wall_time_s:.2f}s"
        )
    print(f"results: {Path(args.out) / 'results.jsonl'}")
    return 0


def _results_path(in_path: str) -> Path:
    path = Path(in_path)
    if path.is_dir():
        path = path / "results.jsonl"
    if not path.exists():
        raise FileNotFoundError(f"no results file at {path}")
    return path


def _cmd_summarize(args: argparse.Namespace) -> int:
    records = read_results(_results_path(args.in_path))
    if not records:
        print("error: results file is empty", file=sys.stderr)
        return 1
    print(format_summary(summarize(records)))
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    records = read_results(_results_path(args.in_path))
    if not records:
        print("error: results file is empty", file=sys.stderr)
        return 1
    winners = compare_modes(
        records, alpha=args.alpha, higher_is_better=args.higher_is_better
    )
    for (dataset, split), best in sorted(winners.items()):
        print(f"{dataset:<12} {split:<6} best: {', '.join(sorted(best))}")
    return 0


def _cmd_fetch(args: argparse.Namespace) -> int:
    try:
        path = uci.fetch_dataset(args.name, args.out, url=args.url)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


def _cmd_match_budget(args: argparse.Namespace) -> int:
    print(match_budget(args.generations, args.pop_size, args.beta, args.ell))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "summarize": _cmd_summarize,
        "compare": _cmd_compare,
        "fetch": _cmd_fetch,
        "match-budget": _cmd_match_budget,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
