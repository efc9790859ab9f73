"""From raw runs to a defensible comparison table.

A single run proves nothing; the harness repeats every configuration
over many seeds, appends one JSON line per run, and the reporting
helpers turn those files into median/IQR tables plus rank tests.  A
setup counts as "among the best" when no rival beats it significantly
under pairwise two-sided tests with step-down multiple-testing
correction.

Everything here runs on temporary files; look inside out_dir afterwards
to see the exact artifacts the command-line interface produces.
"""

import tempfile
from pathlib import Path

import numpy as np

from gpbag import (
    Dataset,
    ExperimentSpec,
    RunConfig,
    compare_modes,
    format_summary,
    read_results,
    run_experiment,
    summarize,
)


def write_problem(path: Path, n=150, seed=5):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-2, 2, size=(n, 2))
    y = X[:, 0] ** 2 - X[:, 1] + rng.normal(scale=0.1, size=n)
    with open(path, "w") as fh:
        for xi, yi in zip(X, y):
            fh.write(f"{xi[0]},{xi[1]},{yi}\n")


def main():
    workdir = Path(tempfile.mkdtemp(prefix="gpbag_demo_"))
    csv = workdir / "bowl.csv"
    write_problem(csv)
    out_dir = workdir / "experiment"

    spec = ExperimentSpec(
        datasets=[str(csv)],
        out_dir=out_dir,
        modes=["segp", "cgp"],
        n_runs=8,
        config=RunConfig(n_pop=100, generations=15, beta=10),
        task="regression",
    )
    print(f"running {len(spec.modes) * spec.n_runs} runs into {out_dir} ...\n")
    run_experiment(spec)

    records = read_results(out_dir / "results.jsonl")
    print(format_summary(summarize(records)))

    print("\nrank tests (lower metric is better):")
    for (dataset, split), best in sorted(compare_modes(records).items()):
        print(f"  {dataset} {split}: best = {', '.join(sorted(best))}")


if __name__ == "__main__":
    main()
