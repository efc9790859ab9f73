"""Figure builders.

Every function here returns a plain ``matplotlib.figure.Figure`` built
without pyplot, so rendering is deterministic and free of global state.
Saving is the caller's job.
"""

from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure

from .io import GenerationLog, PlotInputError, record_numbers

_ELITE_CMAP = "viridis"
_IMPROVE_CMAP = "magma"


def beta_summary(records: list[dict]) -> list[dict]:
    """Per-ensemble-size summary of a batch of runs.

    Groups records by ``beta`` and reports, per group: run count, the
    median and quartiles of ``test_metric``, and the mean wall time.
    Sorted by beta.
    """
    betas = record_numbers(records, "beta").astype(int)
    metric = record_numbers(records, "test_metric")
    wall = record_numbers(records, "wall_time_s")
    out = []
    for beta in np.unique(betas):
        mask = betas == beta
        q1, med, q3 = np.quantile(metric[mask], [0.25, 0.5, 0.75])
        out.append({
            "beta": int(beta),
            "n_runs": int(mask.sum()),
            "q1": float(q1),
            "median": float(med),
            "q3": float(q3),
            "mean_wall_s": float(wall[mask].mean()),
        })
    return out


def make_beta_tradeoff(records: list[dict]) -> Figure:
    """Test metric against run cost, one point per ensemble size.

    Error bars span the interquartile range of the test metric.
    """
    summary = beta_summary(records)
    x = np.array([s["mean_wall_s"] for s in summary])
    y = np.array([s["median"] for s in summary])
    yerr = np.array([
        [s["median"] - s["q1"] for s in summary],
        [s["q3"] - s["median"] for s in summary],
    ])

    fig = Figure(figsize=(6.4, 4.4), layout="constrained")
    ax = fig.add_subplot()
    ax.errorbar(x, y, yerr=yerr, fmt="o-", capsize=3, color="#1f6f8b",
                markersize=5, linewidth=1.0)
    for s, px, py in zip(summary, x, y):
        ax.annotate(f"$\\beta$={s['beta']}", (px, py),
                    textcoords="offset points", xytext=(6, 6), fontsize=9)
    ax.set_xlabel("mean run wall time (s)")
    ax.set_ylabel("test metric (median, IQR)")
    ax.set_title("ensemble size trade-off")
    ax.grid(True, alpha=0.3)
    return fig


def make_diversity(log: GenerationLog, n_pop: int | None = None) -> Figure:
    """Distinct-tree trajectories for the ensemble and the population.

    Plots raw counts; pass ``n_pop`` to normalize both series to
    fractions (the ensemble by its slot count, the population by
    ``n_pop``).
    """
    if log.distinct_ensemble is None or log.distinct_population is None:
        raise PlotInputError(
            "generation log has no diversity columns "
            "(run the experiment with diversity logging on)"
        )
    ens = log.distinct_ensemble.astype(float)
    pop = log.distinct_population.astype(float)
    if n_pop is not None:
        ens = ens / log.n_slots
        pop = pop / n_pop

    fig = Figure(figsize=(6.4, 4.4), layout="constrained")
    ax = fig.add_subplot()
    ax.plot(log.generations, ens, label="ensemble", color="#b0413e")
    ax.plot(log.generations, pop, label="population", color="#1f6f8b")
    ax.set_xlabel("generation")
    if n_pop is not None:
        ax.set_ylabel("fraction of distinct trees")
        ax.set_ylim(0.0, 1.05)
    else:
        ax.set_ylabel("distinct trees")
    ax.set_title("syntactic diversity")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def make_elite_heatmap(log: GenerationLog) -> Figure:
    """Per-sample elite loss over time, one row per ensemble slot."""
    gens = log.generations
    extent = (gens[0] - 0.5, gens[-1] + 0.5, -0.5, log.n_slots - 0.5)

    fig = Figure(figsize=(7.0, 4.0), layout="constrained")
    ax = fig.add_subplot()
    image = ax.imshow(log.elite.T, origin="lower", aspect="auto",
                      extent=extent, cmap=_ELITE_CMAP)
    ax.set_xlabel("generation")
    ax.set_ylabel("ensemble slot")
    ax.set_title("per-sample elite loss")
    fig.colorbar(image, ax=ax, label="loss")
    return fig


def make_evolvability_heatmap(
    log: GenerationLog, n_pop: int | None = None
) -> Figure:
    """Offspring improvement counts per sample, split by kind.

    Top panel: offspring that improved on their own sample.  Bottom:
    offspring that improved on some other sample only.  Pass ``n_pop``
    (the offspring count per generation) to show fractions instead.
    """
    if log.same_improve is None or log.other_improve is None:
        raise PlotInputError(
            "generation log has no improvement columns "
            "(run the experiment with evolvability logging on)"
        )
    same = log.same_improve.astype(float)
    other = log.other_improve.astype(float)
    label = "improving offspring"
    if n_pop is not None:
        same = same / n_pop
        other = other / n_pop
        label = "fraction of offspring"

    gens = log.generations
    extent = (gens[0] - 0.5, gens[-1] + 0.5, -0.5, log.n_slots - 0.5)
    vmax = max(same.max(), other.max()) or 1.0

    fig = Figure(figsize=(7.0, 5.6), layout="constrained")
    axes = fig.subplots(2, 1, sharex=True)
    for ax, data, title in (
        (axes[0], same, "own sample"),
        (axes[1], other, "other sample only"),
    ):
        # one shared scale so the two panels are comparable
        image = ax.imshow(data.T, origin="lower", aspect="auto",
                          extent=extent, cmap=_IMPROVE_CMAP,
                          vmin=0.0, vmax=vmax)
        ax.set_ylabel("slot")
        ax.set_title(title, fontsize=10)
    axes[1].set_xlabel("generation")
    fig.colorbar(image, ax=axes, label=label)
    return fig
