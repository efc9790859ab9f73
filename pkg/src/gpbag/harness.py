"""Batch experiment runner: many (dataset, mode, seed) runs, results on disk.

Outputs under the experiment directory:

``results.jsonl``
    One JSON object per completed run with the flat summary fields
    (dataset, mode, seed, beta, n_pop, generations, use_scaling,
    selection, train_metric, test_metric, pruned_size, wall_time_s),
    appended as runs finish, each line independently parseable.

``gen_logs/<dataset>_<mode>_seed<seed>.csv``
    Per-generation log (only when logging is enabled) in long format with
    columns ``gen, slot, elite_loss, distinct_ens, distinct_pop,
    same_impr, other_impr``; counter columns are empty when their logging
    flag was off.

``errors.log``
    One line per failed dataset or crashed run.

A dataset that fails to load aborts only its own runs; a run that raises
is recorded and skipped.  Either case makes :func:`run_experiment` raise
``HarnessError`` at the end, with completed results attached.
"""

from __future__ import annotations

import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .datasets import Dataset, load_csv
from .engine import GenerationLog, RunConfig, RunResult, run
from .stats import compare_best, median_iqr
from . import uci

GEN_LOG_COLUMNS = (
    "gen", "slot", "elite_loss", "distinct_ens", "distinct_pop",
    "same_impr", "other_impr",
)


class HarnessError(RuntimeError):
    """Some runs or datasets failed; completed results are attached."""

    def __init__(self, failures: list[str], results: list[RunResult]):
        super().__init__(
            f"{len(failures)} failure(s): " + "; ".join(failures[:5])
            + ("; ..." if len(failures) > 5 else "")
        )
        self.failures = failures
        self.results = results


@dataclass
class ExperimentSpec:
    """What to run and where to put it."""

    datasets: list[str]  # registry names or CSV paths
    out_dir: str | Path
    modes: list[str] = field(default_factory=lambda: ["segp"])
    n_runs: int = 40
    base_seed: int = 0
    config: RunConfig = field(default_factory=RunConfig)
    task: str | None = None  # required for bare CSV paths
    data_dir: str | Path = "data"
    fetch_missing: bool = False
    jobs: int = 1


def resolve_dataset(
    name_or_path: str,
    task: str | None,
    data_dir: str | Path,
    fetch_missing: bool = False,
) -> Dataset:
    """A registry name loads (optionally fetching) its cached CSV; anything
    else is treated as a CSV path and needs an explicit task."""
    if name_or_path in uci.REGISTRY:
        if fetch_missing:
            uci.fetch_dataset(name_or_path, data_dir)
        return uci.load_named(name_or_path, data_dir)
    path = Path(name_or_path)
    if not path.exists():
        raise FileNotFoundError(
            f"{name_or_path!r} is neither a known dataset name nor a file"
        )
    if task is None:
        raise ValueError(f"loading {path} needs an explicit task")
    return load_csv(path, task=task)


def generation_log_rows(logs: Iterable[GenerationLog]) -> list[list]:
    """Flatten generation logs to long-format CSV rows."""
    rows = []
    for log in logs:
        n_slots = len(log.elite_losses)
        for slot in range(n_slots):
            div = log.diversity
            ev = log.evolvability
            rows.append([
                log.generation,
                slot,
                f"{log.elite_losses[slot]:.17g}",
                div.distinct_ensemble if div is not None else "",
                div.distinct_population if div is not None else "",
                int(ev.same_improve[slot]) if ev is not None else "",
                int(ev.other_improve[slot]) if ev is not None else "",
            ])
    return rows


def _gen_log_path(out_dir: Path, result: RunResult) -> Path:
    return out_dir / "gen_logs" / (
        f"{result.dataset}_{result.mode}_seed{result.seed}.csv"
    )


def write_generation_log(out_dir: Path, result: RunResult) -> Path:
    path = _gen_log_path(out_dir, result)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GEN_LOG_COLUMNS)
        writer.writerows(generation_log_rows(result.generation_logs or []))
    return path


def append_result(path: Path, result: RunResult) -> None:
    with open(path, "a") as fh:
        fh.write(json.dumps(result.to_record()) + "\n")


def read_results(path: str | Path) -> list[dict]:
    """Read a results file; every line must parse on its own."""
    records = []
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{i}: bad JSON line: {exc}") from None
    return records


def _run_one(args: tuple[RunConfig, Dataset]) -> RunResult:
    cfg, dataset = args
    return run(cfg, dataset)


def run_experiment(spec: ExperimentSpec) -> list[RunResult]:
    """Execute every (dataset, mode, seed) combination and persist results.

    Run seeds are base_seed + run_index.  With jobs > 1 runs execute in a
    process pool; results are appended in completion order.
    """
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results_path = out_dir / "results.jsonl"
    errors_path = out_dir / "errors.log"
    failures: list[str] = []

    def note_failure(msg: str) -> None:
        failures.append(msg)
        with open(errors_path, "a") as fh:
            fh.write(msg + "\n")
        print(msg, file=sys.stderr)

    work: list[tuple[RunConfig, Dataset]] = []
    for ds_name in spec.datasets:
        try:
            dataset = resolve_dataset(
                ds_name, spec.task, spec.data_dir, spec.fetch_missing
            )
        except Exception as exc:
            note_failure(f"dataset {ds_name}: {exc}")
            continue
        for mode in spec.modes:
            for run_index in range(spec.n_runs):
                cfg = replace(
                    spec.config,
                    mode=mode,
                    seed=spec.base_seed + run_index,
                    selection=(
                        spec.config.selection if mode == "segp" else None
                    ),
                )
                work.append((cfg, dataset))

    results: list[RunResult] = []

    def collect(result: RunResult) -> None:
        results.append(result)
        append_result(results_path, result)
        if result.generation_logs is not None:
            write_generation_log(out_dir, result)

    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            futures = {pool.submit(_run_one, item): item for item in work}
            for fut in as_completed(futures):
                cfg, dataset = futures[fut]
                try:
                    collect(fut.result())
                except Exception as exc:
                    note_failure(
                        f"run {dataset.name}/{cfg.mode}/seed{cfg.seed}: {exc}"
                    )
    else:
        for item in work:
            cfg, dataset = item
            try:
                collect(_run_one(item))
            except Exception as exc:
                note_failure(
                    f"run {dataset.name}/{cfg.mode}/seed{cfg.seed}: {exc}"
                )

    if failures:
        raise HarnessError(failures, results)
    return results


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    mode: str
    split: str  # "train" or "test"
    median: float
    iqr: float
    n_runs: int


def summarize(records: Sequence[RunResult | dict]) -> list[SummaryRow]:
    """Median and IQR of the train and test metrics per (dataset, mode)."""
    groups: dict[tuple[str, str], list[dict]] = {}
    for rec in records:
        d = rec.to_record() if isinstance(rec, RunResult) else rec
        groups.setdefault((d["dataset"], d["mode"]), []).append(d)
    rows = []
    for (dataset, mode), bunch in sorted(groups.items()):
        for split, key in (("train", "train_metric"), ("test", "test_metric")):
            med, iqr = median_iqr([b[key] for b in bunch])
            rows.append(SummaryRow(dataset, mode, split, med, iqr, len(bunch)))
    return rows


def format_summary(rows: Sequence[SummaryRow]) -> str:
    header = f"{'dataset':<12} {'mode':<8} {'split':<6} {'median':>12} {'iqr':>12} {'runs':>5}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.dataset:<12} {r.mode:<8} {r.split:<6} "
            f"{r.median:>12.6g} {r.iqr:>12.6g} {r.n_runs:>5}"
        )
    return "\n".join(lines)


def compare_modes(
    records: Sequence[dict],
    alpha: float = 0.05,
    higher_is_better: bool = False,
) -> dict[tuple[str, str], set[str]]:
    """Per (dataset, split), the modes no other mode significantly beats."""
    by_dataset: dict[str, dict[str, list[dict]]] = {}
    for rec in records:
        by_dataset.setdefault(rec["dataset"], {}).setdefault(
            rec["mode"], []
        ).append(rec)
    out: dict[tuple[str, str], set[str]] = {}
    for dataset, by_mode in sorted(by_dataset.items()):
        for split, key in (("train", "train_metric"), ("test", "test_metric")):
            groups = {
                mode: [r[key] for r in runs] for mode, runs in by_mode.items()
            }
            out[(dataset, split)] = compare_best(
                groups, alpha=alpha, higher_is_better=higher_is_better
            )
    return out
