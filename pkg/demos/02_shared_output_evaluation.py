"""Why scoring on beta bootstrap samples is nearly free.

The naive way to get beta fitness values re-runs each tree on every
resampled training set: beta * size * n node evaluations.  But a
bootstrap sample only rearranges training rows, so one full pass over
the training set plus fancy indexing gives the same numbers for
size * n node evaluations and O(n * beta) cheap arithmetic.

This script evaluates one tree both ways and compares results and cost.
"""

import time

import numpy as np

from gpbag import (
    Dataset,
    Tree,
    VariationConfig,
    evaluate_individual,
    evaluate_naive,
    full_nodes,
    sample_bootstrap,
)


def main():
    rng = np.random.default_rng(7)
    n, beta = 1000, 100
    X = rng.normal(size=(n, 4))
    y = X[:, 0] * X[:, 1] - X[:, 2]
    dataset = Dataset(name="demo", features=X, labels=y, task="regression")
    plan = sample_bootstrap(n, beta, rng)
    tree = Tree(full_nodes(7, 4, VariationConfig(), rng))
    print(f"tree size {tree.size} nodes, {n} rows, beta={beta} samples\n")

    t0 = time.perf_counter()
    fast = evaluate_individual(tree, dataset, plan)
    t_fast = time.perf_counter() - t0

    t0 = time.perf_counter()
    naive = evaluate_naive(tree, dataset, plan)
    t_naive = time.perf_counter() - t0

    worst = float(np.max(np.abs(fast.losses - naive.losses)))
    print(f"max loss difference between the two routes: {worst:.2e}")
    print(f"shared-output route: {fast.node_evals:>12,} node evals  ({t_fast * 1e3:7.2f} ms)")
    print(f"per-sample route:    {naive.node_evals:>12,} node evals  ({t_naive * 1e3:7.2f} ms)")
    print(f"\ncost ratio {naive.node_evals / fast.node_evals:.0f}x "
          f"(= beta), wall-clock speedup {t_naive / t_fast:.1f}x")


if __name__ == "__main__":
    main()
