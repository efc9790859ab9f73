"""Run instrumentation: syntactic diversity and offspring improvement tallies.

Improvement bookkeeping compares each offspring against its parent of
record.  For sample j, the offspring counts as a same-sample improvement
when it beats the parent on loss_j itself, and as an other-sample
improvement when it does not but beats the parent on some other sample's
loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .ensembles import Ensemble
from .evaluation import EvaluatedIndividual
from .trees import Tree


def distinct_count(trees: Iterable[Tree]) -> int:
    """Number of syntactically distinct trees."""
    return len(set(trees))


@dataclass(eq=False)
class EvolvabilityTally:
    """Per-sample improvement counters accumulated over one generation."""

    same_improve: np.ndarray
    other_improve: np.ndarray
    offspring_total: int = 0

    @classmethod
    def zeros(cls, beta: int) -> "EvolvabilityTally":
        return cls(
            same_improve=np.zeros(beta, dtype=np.int64),
            other_improve=np.zeros(beta, dtype=np.int64),
        )


def evolvability_update(
    parent: EvaluatedIndividual,
    child: EvaluatedIndividual,
    tally: EvolvabilityTally,
) -> EvolvabilityTally:
    """Fold one parent/offspring pair into the tally (updated in place)."""
    improved = child.losses < parent.losses
    tally.same_improve += improved
    if improved.any():
        tally.other_improve += ~improved
    tally.offspring_total += 1
    return tally


@dataclass(frozen=True)
class DiversitySnapshot:
    """Distinct-tree counts for the archive and the population."""

    distinct_ensemble: int
    distinct_population: int
    ensemble_ratio: float
    population_ratio: float


def diversity_snapshot(
    archive: Ensemble, population: Iterable[EvaluatedIndividual]
) -> DiversitySnapshot:
    pop_trees = [ind.tree for ind in population]
    arch_trees = [m.tree for m in archive.members if m is not None]
    d_ens = distinct_count(arch_trees)
    d_pop = distinct_count(pop_trees)
    return DiversitySnapshot(
        distinct_ensemble=d_ens,
        distinct_population=d_pop,
        ensemble_ratio=d_ens / archive.n_slots,
        population_ratio=d_pop / len(pop_trees) if pop_trees else 0.0,
    )
