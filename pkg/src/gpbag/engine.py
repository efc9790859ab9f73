"""Run orchestration: the bagged-ensemble evolver and its baselines.

Three modes share one configuration surface:

``segp``
    Evolves a whole bagging ensemble in a single run.  Every individual
    carries one fitness per bootstrap sample (computed from a shared
    full-training-set output pass), survivor selection is partitioned
    truncation over parents + offspring (or an ablation scheme), and an
    archive keeps the best individual per sample.  The archive, pruned,
    is the final predictor.

``cgp``
    Conventional single-output GP: tournament parent selection on the
    full-training-set fitness, generational replacement with one elite.

``siel``
    beta independent ``cgp`` evolutions on the same training split; the
    resulting trees form a bagged ensemble of single-run champions.

Randomness comes exclusively from numpy Generators seeded as follows: the
run seed drives the split and (for ``segp``) the whole evolution; ``cgp``
and ``siel`` evolve members on derived streams seed * 10007 + member, so
a one-member ``siel`` run reproduces a ``cgp`` run bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .datasets import Dataset, split, standardize, sample_bootstrap
from .ensembles import (
    Ensemble,
    EnsembleMember,
    empty_archive,
    ensemble_metric,
    prune,
    update_elites,
)
from .evaluation import (
    EvaluatedIndividual,
    evaluate_full,
    evaluate_population,
)
from .insights import (
    DiversitySnapshot,
    EvolvabilityTally,
    diversity_snapshot,
    evolvability_update,
)
from .selection import (
    SelectionScheme,
    aggregate_pwb,
    aggregate_pwl,
    partitioned_truncation,
    tournament_on_scalar,
    truncation_on_scalar,
)
from .trees import VariationConfig, init_ramped_half_and_half, vary_population

MODES = ("segp", "cgp", "siel")
SEGP_SELECTION_KINDS = (
    "partitioned", "trunc-pwb", "trunc-pwl", "tourn-pwb", "tourn-pwl",
)
MEMBER_SEED_STRIDE = 10007


@dataclass
class RunConfig:
    """Everything that determines a run besides the dataset bytes."""

    mode: str = "segp"
    n_pop: int = 500
    generations: int = 100
    beta: int | None = None  # defaults to max(1, n_pop // 10)
    use_scaling: bool = True
    selection: SelectionScheme | None = None  # mode-dependent default
    test_fraction: float = 0.3
    seed: int = 0
    variation: VariationConfig = field(default_factory=VariationConfig)
    log_elites: bool = False
    log_diversity: bool = False
    log_evolvability: bool = False

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.n_pop < 2:
            raise ValueError("n_pop must be at least 2")
        if self.generations < 0:
            raise ValueError("generations must be non-negative")
        if self.beta is None:
            self.beta = max(1, self.n_pop // 10)
        if self.beta < 1:
            raise ValueError("beta must be positive")
        if self.beta > 2 * self.n_pop:
            raise ValueError(
                f"beta={self.beta} cannot exceed the pool size {2 * self.n_pop}"
            )
        if self.selection is None:
            if self.mode == "segp":
                self.selection = SelectionScheme(kind="partitioned")
            else:
                self.selection = SelectionScheme(kind="plain-tournament")
        if self.mode == "segp" and self.selection.kind not in SEGP_SELECTION_KINDS:
            raise ValueError(
                f"selection {self.selection.kind!r} is not valid for segp; "
                f"expected one of {SEGP_SELECTION_KINDS}"
            )
        if self.mode in ("cgp", "siel") and self.selection.kind != "plain-tournament":
            raise ValueError(f"mode {self.mode!r} always uses plain-tournament selection")

    @property
    def wants_logs(self) -> bool:
        return self.log_elites or self.log_diversity or self.log_evolvability

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class GenerationLog:
    """One generation's bookkeeping.

    ``elite_losses`` reads from the archive; ``pop_min_losses`` is the
    per-sample minimum over the current population, the quantity that
    partitioned truncation keeps from rising.
    """

    generation: int
    elite_losses: np.ndarray
    pop_min_losses: np.ndarray
    diversity: DiversitySnapshot | None = None
    evolvability: EvolvabilityTally | None = None


@dataclass
class RunResult:
    """Outcome of one run, with enough context to reproduce it."""

    dataset: str
    mode: str
    seed: int
    beta: int
    n_pop: int
    generations: int
    use_scaling: bool
    selection: str
    train_metric: float
    test_metric: float
    pruned_size: int
    wall_time_s: float
    node_evals: int
    config: dict
    ensemble: Ensemble
    generation_logs: list[GenerationLog] | None = None

    def to_record(self) -> dict:
        """The flat summary row written to results files."""
        return {
            "dataset": self.dataset,
            "mode": self.mode,
            "seed": self.seed,
            "beta": self.beta,
            "n_pop": self.n_pop,
            "generations": self.generations,
            "use_scaling": self.use_scaling,
            "selection": self.selection,
            "train_metric": self.train_metric,
            "test_metric": self.test_metric,
            "pruned_size": self.pruned_size,
            "wall_time_s": self.wall_time_s,
        }


def match_budget(
    generations: int, n_pop: int, beta: int, ell: int
) -> int:
    """Evaluation budget for a single-output baseline whose cost matches a
    bagged run of the given shape, assuming mean tree size ell."""
    if min(generations, n_pop, beta, ell) < 1:
        raise ValueError("all budget parameters must be positive")
    return int(round(generations * n_pop * (beta + ell) / (beta * ell)))


def _prepare(cfg: RunConfig, dataset: Dataset, rng: np.random.Generator):
    train_raw, test_raw = split(dataset, cfg.test_fraction, rng)
    train, test, _ = standardize(train_raw, test_raw)
    return train, test


def _survivors(
    cfg: RunConfig,
    parents: Sequence[EvaluatedIndividual],
    offspring: Sequence[EvaluatedIndividual],
    rng: np.random.Generator,
) -> list[EvaluatedIndividual]:
    kind = cfg.selection.kind
    if kind == "partitioned":
        return partitioned_truncation(parents, offspring, cfg.n_pop, cfg.beta)
    pool = list(parents) + list(offspring)
    key = (
        (lambda ind: aggregate_pwb(ind.losses))
        if kind.endswith("pwb")
        else (lambda ind: aggregate_pwl(ind.losses))
    )
    if kind.startswith("trunc"):
        return truncation_on_scalar(pool, key, cfg.n_pop)
    return tournament_on_scalar(
        pool, key, cfg.selection.tournament_size, cfg.n_pop, rng
    )


def _log_generation(
    cfg: RunConfig,
    logs: list[GenerationLog],
    generation: int,
    archive: Ensemble,
    population: Sequence[EvaluatedIndividual],
    tally: EvolvabilityTally | None,
) -> None:
    if not cfg.wants_logs:
        return
    pop_losses = np.stack([ind.losses for ind in population])
    if cfg.log_evolvability and tally is None:
        tally = EvolvabilityTally.zeros(archive.n_slots)
    logs.append(
        GenerationLog(
            generation=generation,
            elite_losses=archive.slot_losses(),
            pop_min_losses=pop_losses.min(axis=0),
            diversity=(
                diversity_snapshot(archive, population)
                if cfg.log_diversity else None
            ),
            evolvability=tally if cfg.log_evolvability else None,
        )
    )


def run_2segp(cfg: RunConfig, dataset: Dataset) -> RunResult:
    """Evolve a bagging ensemble in one run and score it."""
    if cfg.mode != "segp":
        raise ValueError(f"run_2segp requires mode 'segp', got {cfg.mode!r}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    train, test = _prepare(cfg, dataset, rng)
    plan = sample_bootstrap(train.n_rows, cfg.beta, rng)
    trees = init_ramped_half_and_half(cfg.n_pop, train.n_features, cfg.variation, rng)
    population = evaluate_population(trees, train, plan, cfg.use_scaling)
    node_evals = sum(ind.node_evals for ind in population)
    archive = update_elites(empty_archive(cfg.beta, train.task), population)
    logs: list[GenerationLog] = []
    _log_generation(cfg, logs, 0, archive, population, None)

    for gen in range(1, cfg.generations + 1):
        parent_trees = [ind.tree for ind in population]
        child_trees = vary_population(parent_trees, train.n_features, cfg.variation, rng)
        offspring = evaluate_population(child_trees, train, plan, cfg.use_scaling)
        node_evals += sum(ind.node_evals for ind in offspring)
        tally: EvolvabilityTally | None = None
        if cfg.log_evolvability:
            tally = EvolvabilityTally.zeros(cfg.beta)
            for parent, child in zip(population, offspring):
                evolvability_update(parent, child, tally)
        archive = update_elites(archive, offspring)
        population = _survivors(cfg, population, offspring, rng)
        _log_generation(cfg, logs, gen, archive, population, tally)

    ensemble = prune(archive)
    return RunResult(
        dataset=dataset.name,
        mode=cfg.mode,
        seed=cfg.seed,
        beta=cfg.beta,
        n_pop=cfg.n_pop,
        generations=cfg.generations,
        use_scaling=cfg.use_scaling,
        selection=cfg.selection.kind,
        train_metric=ensemble_metric(ensemble, train),
        test_metric=ensemble_metric(ensemble, test),
        pruned_size=ensemble.n_slots,
        wall_time_s=time.perf_counter() - t0,
        node_evals=node_evals,
        config=cfg.to_dict(),
        ensemble=ensemble,
        generation_logs=logs if cfg.wants_logs else None,
    )


def _best_of(population: Sequence[EvaluatedIndividual]) -> EvaluatedIndividual:
    """Smallest full-train loss; ties prefer smaller trees, then earlier
    position."""
    losses = np.fromiter((ind.full_loss for ind in population), dtype=np.float64)
    sizes = np.fromiter((ind.tree.size for ind in population), dtype=np.int64)
    order = np.lexsort((np.arange(len(population)), sizes, losses))
    return population[int(order[0])]


def _evolve_cgp(
    cfg: RunConfig,
    train: Dataset,
    rng: np.random.Generator,
    logs: list[GenerationLog] | None,
) -> tuple[EvaluatedIndividual, int]:
    """One conventional-GP evolution; returns (champion, node_evals)."""
    trees = init_ramped_half_and_half(cfg.n_pop, train.n_features, cfg.variation, rng)
    population = [evaluate_full(t, train, cfg.use_scaling) for t in trees]
    node_evals = sum(ind.node_evals for ind in population)
    best = _best_of(population)

    def log(gen: int, pop, tally) -> None:
        if logs is None:
            return
        single = Ensemble(
            members=(
                EnsembleMember(
                    tree=best.tree, a=best.full_a, b=best.full_b,
                    weight=1.0, source_sample=0, train_loss=best.full_loss,
                ),
            ),
            task=train.task,
        )
        _log_generation(cfg, logs, gen, single, pop, tally)

    log(0, population, None)
    for gen in range(1, cfg.generations + 1):
        mating = tournament_on_scalar(
            population,
            lambda ind: ind.full_loss,
            cfg.selection.tournament_size,
            cfg.n_pop,
            rng,
        )
        child_trees = vary_population(
            [ind.tree for ind in mating], train.n_features, cfg.variation, rng
        )
        offspring = [evaluate_full(t, train, cfg.use_scaling) for t in child_trees]
        node_evals += sum(ind.node_evals for ind in offspring)
        tally: EvolvabilityTally | None = None
        if cfg.log_evolvability:
            tally = EvolvabilityTally.zeros(1)
            for parent, child in zip(mating, offspring):
                evolvability_update(parent, child, tally)
        # Generational replacement with a single elite: the incumbent
        # champion displaces the worst offspring when none beat it.
        child_best = _best_of(offspring)
        if best.full_loss < child_best.full_loss:
            worst = int(np.argmax([ind.full_loss for ind in offspring]))
            offspring[worst] = best
        else:
            best = child_best
        population = offspring
        log(gen, population, tally)
    return best, node_evals


def _champion_member(
    champ: EvaluatedIndividual, source_sample: int
) -> EnsembleMember:
    return EnsembleMember(
        tree=champ.tree, a=champ.full_a, b=champ.full_b,
        weight=1.0, source_sample=source_sample, train_loss=champ.full_loss,
    )


def run_cgp(cfg: RunConfig, dataset: Dataset) -> RunResult:
    """Conventional single-output GP baseline."""
    if cfg.mode != "cgp":
        raise ValueError(f"run_cgp requires mode 'cgp', got {cfg.mode!r}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    train, test = _prepare(cfg, dataset, rng)
    logs: list[GenerationLog] | None = [] if cfg.wants_logs else None
    member_rng = np.random.default_rng(cfg.seed * MEMBER_SEED_STRIDE)
    champ, node_evals = _evolve_cgp(cfg, train, member_rng, logs)
    predictor = Ensemble(members=(_champion_member(champ, 0),), task=train.task)
    return RunResult(
        dataset=dataset.name,
        mode=cfg.mode,
        seed=cfg.seed,
        beta=cfg.beta,
        n_pop=cfg.n_pop,
        generations=cfg.generations,
        use_scaling=cfg.use_scaling,
        selection=cfg.selection.kind,
        train_metric=ensemble_metric(predictor, train),
        test_metric=ensemble_metric(predictor, test),
        pruned_size=1,
        wall_time_s=time.perf_counter() - t0,
        node_evals=node_evals,
        config=cfg.to_dict(),
        ensemble=predictor,
        generation_logs=logs,
    )


def run_siel(cfg: RunConfig, dataset: Dataset) -> RunResult:
    """beta independent conventional-GP evolutions bagged after the fact.

    All members share one training split; member m evolves on the derived
    stream seed * 10007 + m, so beta=1 reproduces :func:`run_cgp`."""
    if cfg.mode != "siel":
        raise ValueError(f"run_siel requires mode 'siel', got {cfg.mode!r}")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    train, test = _prepare(cfg, dataset, rng)
    members = []
    node_evals = 0
    logs: list[GenerationLog] | None = [] if cfg.wants_logs else None
    for m in range(cfg.beta):
        member_rng = np.random.default_rng(cfg.seed * MEMBER_SEED_STRIDE + m)
        champ, ne = _evolve_cgp(cfg, train, member_rng, logs if m == 0 else None)
        node_evals += ne
        members.append(_champion_member(champ, m))
    predictor = prune(Ensemble(members=tuple(members), task=train.task))
    return RunResult(
        dataset=dataset.name,
        mode=cfg.mode,
        seed=cfg.seed,
        beta=cfg.beta,
        n_pop=cfg.n_pop,
        generations=cfg.generations,
        use_scaling=cfg.use_scaling,
        selection=cfg.selection.kind,
        train_metric=ensemble_metric(predictor, train),
        test_metric=ensemble_metric(predictor, test),
        pruned_size=predictor.n_slots,
        wall_time_s=time.perf_counter() - t0,
        node_evals=node_evals,
        config=cfg.to_dict(),
        ensemble=predictor,
        generation_logs=logs,
    )


def run(cfg: RunConfig, dataset: Dataset) -> RunResult:
    """Dispatch on cfg.mode."""
    if cfg.mode == "segp":
        return run_2segp(cfg, dataset)
    if cfg.mode == "cgp":
        return run_cgp(cfg, dataset)
    return run_siel(cfg, dataset)
