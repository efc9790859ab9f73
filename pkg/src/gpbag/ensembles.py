"""The ensemble archive: per-sample elites, aggregation, pruning, export.

One archive slot per bootstrap sample holds the best individual that
sample has seen, together with that sample's scaling coefficients.  The
final predictor aggregates all slots: weighted mean of scaled outputs for
regression, weighted majority vote (ties to class 0) for classification.

Pruning merges duplicate trees so the predictor gets cheaper without its
predictions moving: regression merges syntactically equal trees into one
member whose coefficients are the weight-weighted means, classification
merges only members that agree on tree and coefficients exactly.  Total
weight stays equal to the slot count either way.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .datasets import Dataset, _check_task
from .evaluation import EvaluatedIndividual
from .trees import Tree, eval_tree_outputs, format_tree, parse_tree, FLOAT_MAX


@dataclass(frozen=True)
class EnsembleMember:
    """One archived predictor: a tree, its scaling, and its vote weight."""

    tree: Tree
    a: float
    b: float
    weight: float
    source_sample: int
    train_loss: float


@dataclass(frozen=True)
class Ensemble:
    """A weighted collection of scaled trees acting as one predictor.

    Fresh archives hold one ``None`` sentinel per bootstrap sample (an
    empty slot with implicit infinite loss); prediction and pruning
    require every slot filled.
    """

    members: tuple[EnsembleMember | None, ...]
    task: str

    def __post_init__(self) -> None:
        _check_task(self.task)
        if not self.members:
            raise ValueError("an ensemble needs at least one slot")

    @property
    def n_slots(self) -> int:
        return len(self.members)

    @property
    def total_weight(self) -> float:
        return float(sum(m.weight for m in self.members if m is not None))

    def filled_members(self) -> tuple[EnsembleMember, ...]:
        if any(m is None for m in self.members):
            raise ValueError("ensemble has empty slots; run selection first")
        return self.members  # type: ignore[return-value]

    def slot_losses(self) -> np.ndarray:
        """Per-slot elite training losses; empty slots read as +inf."""
        return np.array(
            [np.inf if m is None else m.train_loss for m in self.members]
        )


def empty_archive(beta: int, task: str) -> Ensemble:
    if beta < 1:
        raise ValueError("beta must be positive")
    return Ensemble(members=(None,) * beta, task=task)


def update_elites(
    archive: Ensemble, population: Sequence[EvaluatedIndividual]
) -> Ensemble:
    """Refresh every slot j with the population's best individual on loss_j
    when it is strictly better than the incumbent; exact ties keep the
    incumbent.  Within the population, the earliest index wins a tie."""
    if not population:
        return archive
    losses = np.stack([ind.losses for ind in population])
    if losses.shape[1] != archive.n_slots:
        raise ValueError(
            f"fitness vectors have {losses.shape[1]} entries, "
            f"expected {archive.n_slots}"
        )
    best_idx = np.argmin(losses, axis=0)  # first minimal index per slot
    members = list(archive.members)
    for j in range(archive.n_slots):
        cand = population[int(best_idx[j])]
        cand_loss = float(cand.losses[j])
        incumbent = members[j]
        if incumbent is None or cand_loss < incumbent.train_loss:
            members[j] = EnsembleMember(
                tree=cand.tree,
                a=float(cand.a[j]),
                b=float(cand.b[j]),
                weight=1.0,
                source_sample=j,
                train_loss=cand_loss,
            )
    return Ensemble(members=tuple(members), task=archive.task)


def _member_outputs(
    members: Sequence[EnsembleMember], features: np.ndarray
) -> np.ndarray:
    """Scaled per-member outputs, shape (n_members, n_rows)."""
    rows = []
    for m in members:
        o, _ = eval_tree_outputs(m.tree, features)
        with np.errstate(all="ignore"):
            rows.append(np.clip(m.a + m.b * o, -FLOAT_MAX, FLOAT_MAX))
    return np.stack(rows)


def predict(ensemble: Ensemble, features: np.ndarray) -> np.ndarray:
    """Aggregate member predictions over the rows of ``features``."""
    members = ensemble.filled_members()
    scaled = _member_outputs(members, features)
    weights = np.array([m.weight for m in members])
    if ensemble.task == "regression":
        return weights @ scaled / weights.sum()
    votes = (scaled >= 0.5).astype(np.float64)
    weight_for_one = weights @ votes
    weight_for_zero = weights.sum() - weight_for_one
    # Strictly more weight on class 1 is required; ties resolve to 0.
    return (weight_for_one > weight_for_zero).astype(np.float64)


def ensemble_metric(ensemble: Ensemble, dataset: Dataset) -> float:
    """Root mean squared error for regression, accuracy for classification."""
    preds = predict(ensemble, dataset.features)
    if ensemble.task == "regression":
        diff = dataset.labels - preds
        return float(np.sqrt(np.mean(diff * diff)))
    return float(np.mean(preds == dataset.labels))


def prune(ensemble: Ensemble) -> Ensemble:
    """Merge duplicate members into weighted representatives.

    Regression groups by tree alone and averages (a, b) weighted by member
    weight; classification groups by (tree, a, b) exactly.  Predictions
    are unchanged and the total weight is preserved.
    """
    members = ensemble.filled_members()
    groups: dict = {}
    order: list = []
    for m in members:
        key = m.tree if ensemble.task == "regression" else (m.tree, m.a, m.b)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(m)
    merged = []
    for key in order:
        bunch = groups[key]
        w = sum(m.weight for m in bunch)
        if ensemble.task == "regression":
            a = sum(m.a * m.weight for m in bunch) / w
            b = sum(m.b * m.weight for m in bunch) / w
        else:
            a, b = bunch[0].a, bunch[0].b
        merged.append(replace(bunch[0], a=a, b=b, weight=w))
    return Ensemble(members=tuple(merged), task=ensemble.task)


def export_ensemble(ensemble: Ensemble) -> list[str]:
    """Serialize members as ``weight;a;b;prefix-tree-text`` lines."""
    return [
        f"{m.weight:.17g};{m.a:.17g};{m.b:.17g};{format_tree(m.tree)}"
        for m in ensemble.filled_members()
    ]


def parse_ensemble(lines: Iterable[str], task: str) -> Ensemble:
    """Rebuild a predictor from exported lines.

    Source-sample indices become positional and training losses are not
    part of the format, so only prediction-relevant state round-trips.
    """
    members = []
    for i, line in enumerate(lines):
        line = line.strip()
        if not line:
            continue
        parts = line.split(";")
        if len(parts) != 4:
            raise ValueError(f"line {i + 1}: expected 'weight;a;b;tree'")
        weight, a, b = (float(p) for p in parts[:3])
        members.append(
            EnsembleMember(
                tree=parse_tree(parts[3]), a=a, b=b, weight=weight,
                source_sample=i, train_loss=float("nan"),
            )
        )
    if not members:
        raise ValueError("no ensemble members found")
    return Ensemble(members=tuple(members), task=task)
