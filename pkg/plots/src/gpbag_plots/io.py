"""Readers for the experiment artifacts the figures are built from.

Two file shapes, both produced by the gpbag harness and consumed here
with no other coupling:

results files (``*.jsonl``)
    One JSON object per run; the fields used are ``beta``, ``n_pop``,
    ``test_metric``, and ``wall_time_s``.

generation logs (``*.csv``)
    Long format, header ``gen,slot,elite_loss,distinct_ens,distinct_pop,
    same_impr,other_impr``; one row per ensemble slot per generation.
    The counter columns are empty when their logging was disabled.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GEN_LOG_HEADER = (
    "gen", "slot", "elite_loss", "distinct_ens", "distinct_pop",
    "same_impr", "other_impr",
)


class PlotInputError(ValueError):
    """Unusable input file: missing, empty, or off-schema."""


def read_results(paths: list[str | Path]) -> list[dict]:
    """All run records from one or more results files, in file order."""
    records = []
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise PlotInputError(f"{path}: no such file")
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise PlotInputError(
                        f"{path}:{lineno}: not a JSON record ({exc})"
                    ) from None
                if not isinstance(record, dict):
                    raise PlotInputError(
                        f"{path}:{lineno}: expected a JSON object"
                    )
                records.append(record)
    if not records:
        joined = ", ".join(str(p) for p in paths)
        raise PlotInputError(f"no run records in {joined}")
    return records


def record_numbers(records: list[dict], key: str) -> np.ndarray:
    """Pull one numeric field out of every record, with a clear error."""
    values = []
    for record in records:
        if key not in record:
            raise PlotInputError(f"run record is missing {key!r}")
        try:
            values.append(float(record[key]))
        except (TypeError, ValueError):
            raise PlotInputError(
                f"run record field {key!r} is not a number: {record[key]!r}"
            ) from None
    return np.asarray(values)


@dataclass(frozen=True)
class GenerationLog:
    """One run's per-generation log, pivoted to (generation x slot)."""

    generations: np.ndarray  # sorted generation numbers
    elite: np.ndarray  # losses, shape (n_gens, n_slots)
    distinct_ensemble: np.ndarray | None  # per generation
    distinct_population: np.ndarray | None
    same_improve: np.ndarray | None  # counts, shape (n_gens, n_slots)
    other_improve: np.ndarray | None

    @property
    def n_slots(self) -> int:
        return self.elite.shape[1]


def read_generation_log(path: str | Path) -> GenerationLog:
    path = Path(path)
    if not path.exists():
        raise PlotInputError(f"{path}: no such file")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != GEN_LOG_HEADER:
        raise PlotInputError(
            f"{path}: expected generation-log header "
            f"{','.join(GEN_LOG_HEADER)}"
        )
    if len(rows) == 1:
        raise PlotInputError(f"{path}: no data rows")

    by_gen: dict[int, dict[int, list[str]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(GEN_LOG_HEADER):
            raise PlotInputError(
                f"{path}:{lineno}: expected {len(GEN_LOG_HEADER)} cells, "
                f"got {len(row)}"
            )
        try:
            gen = int(row[0])
            slot = int(row[1])
        except ValueError:
            raise PlotInputError(
                f"{path}:{lineno}: gen/slot are not integers"
            ) from None
        by_gen.setdefault(gen, {})[slot] = [c.strip() for c in row]

    generations = np.array(sorted(by_gen), dtype=np.int64)
    slots = sorted(by_gen[int(generations[0])])
    n_slots = len(slots)
    if slots != list(range(n_slots)):
        raise PlotInputError(f"{path}: slots are not contiguous from 0")
    for gen, per_slot in by_gen.items():
        if sorted(per_slot) != slots:
            raise PlotInputError(
                f"{path}: generation {gen} has a different slot set"
            )

    def parse_float(text: str, what: str) -> float:
        try:
            return float(text)
        except ValueError:
            raise PlotInputError(f"{path}: bad {what} value {text!r}") from None

    # a counter column must be filled everywhere or empty everywhere
    counters: dict[int, np.ndarray | None] = {}
    for col in (3, 4, 5, 6):
        filled = {per_slot[s][col] != ""
                  for per_slot in by_gen.values() for s in per_slot}
        if filled == {True}:
            shape = len(generations) if col in (3, 4) else \
                (len(generations), n_slots)
            counters[col] = np.empty(shape)
        elif filled == {False}:
            counters[col] = None
        else:
            raise PlotInputError(
                f"{path}: column {GEN_LOG_HEADER[col]} is only partly filled"
            )

    elite = np.empty((len(generations), n_slots))
    for gi, gen in enumerate(generations):
        per_slot = by_gen[int(gen)]
        for slot in slots:
            row = per_slot[slot]
            elite[gi, slot] = parse_float(row[2], "elite_loss")
            for col in (5, 6):
                if counters[col] is not None:
                    counters[col][gi, slot] = parse_float(
                        row[col], GEN_LOG_HEADER[col]
                    )
        for col in (3, 4):
            if counters[col] is not None:
                counters[col][gi] = parse_float(
                    per_slot[0][col], GEN_LOG_HEADER[col]
                )

    return GenerationLog(
        generations=generations,
        elite=elite,
        distinct_ensemble=counters[3],
        distinct_population=counters[4],
        same_improve=counters[5],
        other_improve=counters[6],
    )
