"""Baselines on an equal footing.

Two natural baselines: a conventional single-output GP (one tree at the
end) and an ensemble built from beta fully independent GP evolutions.
The second obviously costs about beta times one evolution; a bagged run
gets its beta fitness values almost for free.  To compare at equal node
evaluations, match_budget converts a bagged run's shape into the
generations x population budget an independent-evolutions setup may
spend.

This demo sizes the baselines with match_budget, runs everything on one
synthetic problem, and reports metric and measured cost side by side.
"""

import numpy as np

from gpbag import Dataset, RunConfig, match_budget, run


def synthetic_problem(n=250, seed=11):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-3, 3, size=(n, 3))
    y = np.abs(X[:, 0]) * X[:, 1] + X[:, 2] + rng.normal(scale=0.1, size=n)
    return Dataset(name="dunes", features=X, labels=y, task="regression")


def main():
    dataset = synthetic_problem()
    n_pop, generations, beta = 150, 30, 15
    mean_size = 40  # rough expected tree size for the budget formula

    budget = match_budget(generations, n_pop, beta, mean_size)
    gens_matched = max(1, round(budget / n_pop))
    print(f"bagged run: {n_pop} x {generations} generations, beta={beta}")
    print(f"matched budget for independent evolutions: {budget} evaluations"
          f" -> {n_pop} x {gens_matched} generations each\n")

    runs = {
        "bagged": RunConfig(n_pop=n_pop, generations=generations, beta=beta),
        "single-tree": RunConfig(mode="cgp", n_pop=n_pop,
                                 generations=gens_matched),
        "independent": RunConfig(mode="siel", n_pop=n_pop,
                                 generations=gens_matched, beta=beta),
    }
    print(f"{'setup':<12} {'test RMSE':>10} {'node evals':>14} {'wall':>8}")
    for label, cfg in runs.items():
        res = run(cfg, dataset)
        print(f"{label:<12} {res.test_metric:>10.4f} {res.node_evals:>14,} "
              f"{res.wall_time_s:>7.1f}s")


if __name__ == "__main__":
    main()
