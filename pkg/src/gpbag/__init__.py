"""gpbag: bagging ensembles of expression trees, evolved in a single GP run.

The public surface re-exports the main building blocks; each module's
docstring carries the details.  Typical use:

    from gpbag import RunConfig, load_csv, run

    dataset = load_csv("housing.csv", task="regression")
    result = run(RunConfig(seed=1), dataset)
    print(result.test_metric, result.pruned_size)
"""

from .datasets import (
    BootstrapPlan,
    Dataset,
    StandardizationStats,
    load_csv,
    sample_bootstrap,
    split,
    standardize,
)
from .engine import (
    GenerationLog,
    RunConfig,
    RunResult,
    match_budget,
    run,
    run_2segp,
    run_cgp,
    run_siel,
)
from .ensembles import (
    Ensemble,
    EnsembleMember,
    ensemble_metric,
    export_ensemble,
    parse_ensemble,
    predict,
    prune,
    update_elites,
)
from .evaluation import (
    EvaluatedIndividual,
    evaluate_individual,
    evaluate_naive,
    evaluate_population,
    linear_scaling_coeffs,
)
from .harness import (
    ExperimentSpec,
    HarnessError,
    compare_modes,
    format_summary,
    read_results,
    run_experiment,
    summarize,
)
from .insights import (
    DiversitySnapshot,
    EvolvabilityTally,
    distinct_count,
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
from .stats import (
    compare_best,
    holm_bonferroni,
    mann_whitney_u,
    median_iqr,
)
from .trees import (
    Tree,
    VariationConfig,
    eval_tree_outputs,
    format_tree,
    full_nodes,
    grow_nodes,
    init_ramped_half_and_half,
    parse_tree,
    subtree_crossover,
    subtree_mutation,
    vary_population,
)
from .uci import dataset_names, fetch_dataset, load_named

__version__ = "0.1.0"
