"""Survivor selection over the pooled parent and offspring populations.

The centerpiece is partitioned truncation: the pool is sorted once per
bootstrap sample by that sample's loss and each sample contributes a fixed
quota of survivors, so every sample keeps its own selection pressure.
Quotas follow the remainder rule: the first (n_pop mod beta) samples get
floor(n_pop / beta) + 1 survivors, the rest floor(n_pop / beta).

Ablation schemes collapse the fitness vector to a scalar first (its best
or worst entry) and apply plain truncation or tournaments.  All sorts
break ties by smaller tree size, then earlier pool position (parents
before offspring), which keeps selection deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .evaluation import EvaluatedIndividual

SELECTION_KINDS = (
    "partitioned",
    "trunc-pwb",
    "trunc-pwl",
    "tourn-pwb",
    "tourn-pwl",
    "plain-tournament",
)


@dataclass(frozen=True)
class SelectionScheme:
    """Which survivor-selection rule a run uses."""

    kind: str = "partitioned"
    tournament_size: int = 8

    def __post_init__(self) -> None:
        if self.kind not in SELECTION_KINDS:
            raise ValueError(
                f"unknown selection kind {self.kind!r}; expected one of {SELECTION_KINDS}"
            )
        if self.tournament_size < 2:
            raise ValueError("tournament_size must be at least 2")


def aggregate_pwb(losses: np.ndarray) -> float:
    """Per-win-best collapse: an individual is as good as its best sample."""
    return float(np.min(losses))


def aggregate_pwl(losses: np.ndarray) -> float:
    """Per-win-worst collapse: an individual is as good as its worst sample."""
    return float(np.max(losses))


def _pool_arrays(
    pool: Sequence[EvaluatedIndividual],
) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.fromiter((ind.tree.size for ind in pool), dtype=np.int64, count=len(pool))
    positions = np.arange(len(pool))
    return sizes, positions


def partition_quotas(n_pop: int, beta: int) -> list[int]:
    """Survivor quota per bootstrap sample; sums to n_pop."""
    base, extra = divmod(n_pop, beta)
    return [base + 1 if j < extra else base for j in range(beta)]


def partitioned_truncation(
    parents: Sequence[EvaluatedIndividual],
    offspring: Sequence[EvaluatedIndividual],
    n_pop: int,
    beta: int,
) -> list[EvaluatedIndividual]:
    """Select n_pop survivors from parents + offspring, one quota of
    best-by-loss_j individuals per bootstrap sample j.

    The same pool member may survive through several samples, so the
    result is a multiset over the pool.
    """
    if len(parents) != n_pop or len(offspring) != n_pop:
        raise ValueError("parents and offspring must each have n_pop members")
    if beta < 1:
        raise ValueError("beta must be positive")
    if beta > 2 * n_pop:
        raise ValueError(f"beta={beta} exceeds pool size {2 * n_pop}")
    pool = list(parents) + list(offspring)
    losses = np.stack([ind.losses for ind in pool])
    if losses.shape[1] != beta:
        raise ValueError(
            f"fitness vectors have {losses.shape[1]} entries, expected beta={beta}"
        )
    sizes, positions = _pool_arrays(pool)
    survivors: list[EvaluatedIndividual] = []
    for j, quota in enumerate(partition_quotas(n_pop, beta)):
        order = np.lexsort((positions, sizes, losses[:, j]))
        survivors.extend(pool[k] for k in order[:quota])
    return survivors


def truncation_on_scalar(
    pool: Sequence[EvaluatedIndividual],
    key: Callable[[EvaluatedIndividual], float],
    n_pop: int,
) -> list[EvaluatedIndividual]:
    """Keep the n_pop pool members with the smallest key."""
    if n_pop > len(pool):
        raise ValueError("cannot truncate to more survivors than pool members")
    keys = np.fromiter((key(ind) for ind in pool), dtype=np.float64, count=len(pool))
    sizes, positions = _pool_arrays(pool)
    order = np.lexsort((positions, sizes, keys))
    return [pool[k] for k in order[:n_pop]]


def tournament_on_scalar(
    pool: Sequence[EvaluatedIndividual],
    key: Callable[[EvaluatedIndividual], float],
    tournament_size: int,
    n_pop: int,
    rng: np.random.Generator,
) -> list[EvaluatedIndividual]:
    """Draw n_pop winners of independent tournaments.

    Each tournament samples tournament_size contestants uniformly with
    replacement; the smallest key wins, with exact ties settled uniformly
    among the tied contestant slots.
    """
    keys = np.fromiter((key(ind) for ind in pool), dtype=np.float64, count=len(pool))
    winners: list[EvaluatedIndividual] = []
    for _ in range(n_pop):
        contestants = rng.integers(0, len(pool), size=tournament_size)
        kvals = keys[contestants]
        best = kvals.min()
        tied = contestants[kvals == best]
        pick = tied[0] if len(tied) == 1 else tied[int(rng.integers(len(tied)))]
        winners.append(pool[int(pick)])
    return winners
