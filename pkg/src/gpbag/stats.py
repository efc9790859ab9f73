"""Rank statistics for comparing runs: Mann-Whitney U, Holm correction,
and robust summaries.

The U test enumerates every assignment exactly for pooled sizes up to 12
and otherwise uses the normal approximation with midranks, tie-corrected
variance, and a 0.5 continuity correction.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

EXACT_LIMIT = 12  # largest pooled size enumerated exactly


def median_iqr(values: Sequence[float]) -> tuple[float, float]:
    """Median and interquartile range with linear quantile interpolation."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need at least one value")
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return float(med), float(q3 - q1)


def _u_statistic(ranks_a: np.ndarray, n_a: int) -> float:
    return float(ranks_a.sum() - n_a * (n_a + 1) / 2.0)


def mann_whitney_u(
    a: Sequence[float], b: Sequence[float]
) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test; returns (U for sample a, p-value).

    Exact route: for small pools, every C(n_a + n_b, n_a) assignment of
    the pooled values is enumerated and p is the fraction with
    |U - mu| >= |U_observed - mu|, mu = n_a * n_b / 2.  Degenerate pools
    (all values identical) give p = 1.
    """
    a = np.asarray(list(a), dtype=np.float64)
    b = np.asarray(list(b), dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples need at least one value")
    n_a, n_b = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)  # midranks for ties
    u_obs = _u_statistic(ranks[:n_a], n_a)
    mu = n_a * n_b / 2.0

    if n_a + n_b <= EXACT_LIMIT:
        dev_obs = abs(u_obs - mu)
        hits = 0
        total = 0
        for combo in combinations(range(n_a + n_b), n_a):
            u = _u_statistic(ranks[list(combo)], n_a)
            # U values move in half-integer steps; the epsilon only guards
            # against float noise in the midranks.
            if abs(u - mu) >= dev_obs - 1e-9:
                hits += 1
            total += 1
        return u_obs, hits / total

    # Normal approximation with tie correction.
    n = n_a + n_b
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = np.sum(counts**3 - counts) / (n * (n - 1))
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term)
    if var <= 0.0:
        return u_obs, 1.0
    z = max(abs(u_obs - mu) - 0.5, 0.0) / math.sqrt(var)
    p = math.erfc(z / math.sqrt(2.0))
    return u_obs, min(max(p, 0.0), 1.0)


def holm_bonferroni(p_values: Sequence[float], alpha: float = 0.05) -> list[bool]:
    """Step-down Holm correction; returns a rejection flag per input.

    Sorted ascending, p_(i) is tested against alpha / (m - i); the first
    failure retains that hypothesis and every larger one.
    """
    m = len(p_values)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: p_values[i])
    rejected = [False] * m
    for rank, idx in enumerate(order):
        if p_values[idx] <= alpha / (m - rank):
            rejected[idx] = True
        else:
            break
    return rejected


def compare_best(
    groups: Mapping[str, Sequence[float]],
    alpha: float = 0.05,
    higher_is_better: bool = False,
) -> set[str]:
    """Names of the groups no other group significantly beats.

    All pairwise U tests form one Holm family; a rejected pair marks the
    side with the worse rank tendency as beaten.
    """
    names = [name for name in groups]
    for name in names:
        if len(groups[name]) == 0:
            raise ValueError(f"group {name!r} is empty")
    if len(names) <= 1:
        return set(names)
    pairs = list(combinations(names, 2))
    stats = []
    p_values = []
    for x, y in pairs:
        u, p = mann_whitney_u(groups[x], groups[y])
        stats.append(u)
        p_values.append(p)
    flags = holm_bonferroni(p_values, alpha)
    beaten: set[str] = set()
    for (x, y), u, rej in zip(pairs, stats, flags):
        if not rej:
            continue
        mu = len(groups[x]) * len(groups[y]) / 2.0
        # U above its mean means sample x tends larger than sample y.
        x_larger = u > mu
        if higher_is_better:
            beaten.add(y if x_larger else x)
        else:
            beaten.add(x if x_larger else y)
    return {name for name in names if name not in beaten}
