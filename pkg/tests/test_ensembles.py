import numpy as np
import pytest

from gpbag.datasets import Dataset, sample_bootstrap
from gpbag.ensembles import (
    Ensemble,
    EnsembleMember,
    empty_archive,
    ensemble_metric,
    export_ensemble,
    parse_ensemble,
    predict,
    prune,
    update_elites,
)
from gpbag.evaluation import evaluate_population
from gpbag.trees import (
    ADD,
    MUL,
    Tree,
    VariationConfig,
    constant,
    feature,
    grow_nodes,
)

X0 = Tree([feature(0)])
X1 = Tree([feature(1)])


def member(tree, a=0.0, b=1.0, weight=1.0, slot=0, loss=0.5):
    return EnsembleMember(tree=tree, a=a, b=b, weight=weight,
                          source_sample=slot, train_loss=loss)


class TestArchive:
    def test_empty_archive_has_infinite_losses(self):
        arch = empty_archive(4, "regression")
        assert arch.n_slots == 4
        assert np.all(np.isinf(arch.slot_losses()))
        with pytest.raises(ValueError, match="empty"):
            arch.filled_members()

    def test_update_fills_slots_with_per_sample_best(self, rng):
        ds = Dataset("d", np.random.default_rng(0).normal(size=(30, 2)),
                     np.random.default_rng(1).normal(size=30), "regression")
        plan = sample_bootstrap(30, 3, rng)
        cfg = VariationConfig()
        trees = [Tree(grow_nodes(3, 2, cfg, rng)) for _ in range(8)]
        pop = evaluate_population(trees, ds, plan)
        arch = update_elites(empty_archive(3, "regression"), pop)
        losses = np.stack([p.losses for p in pop])
        np.testing.assert_allclose(arch.slot_losses(), losses.min(axis=0))
        for j, m in enumerate(arch.members):
            assert m.source_sample == j
            assert m.weight == 1.0

    def test_update_keeps_incumbent_on_tie(self, rng):
        ds = Dataset("d", np.ones((5, 1)), np.zeros(5), "regression")
        plan = sample_bootstrap(5, 1, rng)
        pop = evaluate_population([X0], ds, plan, use_scaling=False)
        arch = update_elites(empty_archive(1, "regression"), pop)
        incumbent = arch.members[0]
        # same loss from a different tree must not displace the incumbent
        other = evaluate_population([Tree([constant(1.0)])], ds, plan,
                                    use_scaling=False)
        arch2 = update_elites(arch, other)
        assert arch2.members[0] is incumbent

    def test_update_improves_strictly(self, rng):
        ds = Dataset("d", np.arange(6.0).reshape(6, 1),
                     np.arange(6.0), "regression")
        plan = sample_bootstrap(6, 2, rng)
        bad = evaluate_population([Tree([constant(100.0)])], ds, plan,
                                  use_scaling=False)
        good = evaluate_population([X0], ds, plan, use_scaling=False)
        arch = update_elites(empty_archive(2, "regression"), bad)
        arch = update_elites(arch, good)
        np.testing.assert_allclose(arch.slot_losses(), 0.0)


class TestPrediction:
    def test_regression_weighted_mean(self):
        ens = Ensemble(
            members=(member(X0, a=0.0, b=1.0, weight=3.0),
                     member(X0, a=2.0, b=0.0, weight=1.0)),
            task="regression",
        )
        X = np.array([[4.0], [8.0]])
        # (3 * x + 1 * 2) / 4
        np.testing.assert_allclose(predict(ens, X), [3.5, 6.5])

    def test_classification_majority(self):
        one = member(Tree([constant(1.0)]))
        zero = member(Tree([constant(0.0)]))
        ens = Ensemble(members=(one, one, zero), task="classification")
        np.testing.assert_array_equal(predict(ens, np.zeros((2, 1))), [1.0, 1.0])

    def test_classification_tie_goes_to_zero(self):
        one = member(Tree([constant(1.0)]))
        zero = member(Tree([constant(0.0)]))
        ens = Ensemble(members=(one, zero), task="classification")
        np.testing.assert_array_equal(predict(ens, np.zeros((3, 1))), [0.0, 0.0, 0.0])

    def test_classification_weighted_vote(self):
        one = member(Tree([constant(1.0)]), weight=3.0)
        zero = member(Tree([constant(0.0)]), weight=2.0)
        ens = Ensemble(members=(one, zero), task="classification")
        np.testing.assert_array_equal(predict(ens, np.zeros((1, 1))), [1.0])

    def test_member_scaling_applied(self):
        ens = Ensemble(members=(member(X0, a=10.0, b=2.0),), task="regression")
        np.testing.assert_allclose(predict(ens, np.array([[1.0], [3.0]])),
                                   [12.0, 16.0])


class TestMetrics:
    def test_rmse(self):
        ens = Ensemble(members=(member(X0),), task="regression")
        ds = Dataset("d", np.array([[1.0], [2.0]]), np.array([1.0, 4.0]),
                     "regression")
        assert ensemble_metric(ens, ds) == pytest.approx(np.sqrt(2.0))

    def test_accuracy(self):
        ens = Ensemble(members=(member(Tree([constant(1.0)])),),
                       task="classification")
        ds = Dataset("d", np.zeros((4, 1)), np.array([1.0, 1.0, 1.0, 0.0]),
                     "classification")
        assert ensemble_metric(ens, ds) == pytest.approx(0.75)


class TestPrune:
    def test_regression_merges_by_tree_with_weighted_coeffs(self):
        ens = Ensemble(
            members=(member(X0, a=0.0, b=1.0), member(X0, a=2.0, b=3.0),
                     member(X0, a=4.0, b=5.0)),
            task="regression",
        )
        pruned = prune(ens)
        assert pruned.n_slots == 1
        m = pruned.members[0]
        assert m.a == pytest.approx(2.0)
        assert m.b == pytest.approx(3.0)
        assert m.weight == pytest.approx(3.0)

    def test_regression_weighted_merge(self):
        ens = Ensemble(
            members=(member(X0, a=0.0, b=0.0, weight=3.0),
                     member(X0, a=4.0, b=8.0, weight=1.0)),
            task="regression",
        )
        m = prune(ens).members[0]
        assert m.a == pytest.approx(1.0)
        assert m.b == pytest.approx(2.0)

    def test_regression_merge_preserves_predictions(self, rng):
        cfg = VariationConfig()
        X = rng.normal(size=(20, 3))
        for _ in range(100):
            tree = Tree(grow_nodes(3, 3, cfg, rng))
            coeffs = rng.normal(size=(4, 2))
            members = tuple(
                member(tree, a=c[0], b=c[1]) for c in coeffs
            ) + (member(Tree(grow_nodes(2, 3, cfg, rng)), a=1.0, b=2.0),)
            ens = Ensemble(members=members, task="regression")
            before = predict(ens, X)
            after = predict(prune(ens), X)
            np.testing.assert_allclose(after, before, rtol=1e-12, atol=1e-12)

    def test_classification_merges_only_exact_duplicates(self):
        ens = Ensemble(
            members=(member(X0, a=1.0, b=2.0), member(X0, a=1.0, b=2.0),
                     member(X0, a=1.0, b=2.5)),
            task="classification",
        )
        pruned = prune(ens)
        assert pruned.n_slots == 2
        weights = sorted(m.weight for m in pruned.members)
        assert weights == [1.0, 2.0]

    def test_total_weight_preserved(self, rng):
        cfg = VariationConfig()
        trees = [Tree(grow_nodes(2, 2, cfg, rng)) for _ in range(3)]
        members = tuple(member(trees[int(rng.integers(3))], slot=j)
                        for j in range(10))
        for task in ("regression", "classification"):
            ens = Ensemble(members=members, task=task)
            assert prune(ens).total_weight == pytest.approx(10.0)

    def test_distinct_members_untouched(self):
        ens = Ensemble(members=(member(X0), member(X1)), task="regression")
        assert prune(ens).n_slots == 2


class TestExport:
    def test_line_format(self):
        ens = Ensemble(members=(member(X0, a=-0.5, b=1.25, weight=2.0),),
                       task="regression")
        lines = export_ensemble(ens)
        assert lines == ["2;-0.5;1.25;(x0)"]

    def test_round_trip_predictions(self, rng):
        cfg = VariationConfig()
        members = tuple(
            member(Tree(grow_nodes(3, 2, cfg, rng)),
                   a=float(rng.normal()), b=float(rng.normal()),
                   weight=float(rng.integers(1, 4)), slot=j)
            for j in range(5)
        )
        ens = Ensemble(members=members, task="regression")
        back = parse_ensemble(export_ensemble(ens), task="regression")
        X = rng.normal(size=(10, 2))
        np.testing.assert_allclose(predict(back, X), predict(ens, X), rtol=1e-12)

    def test_parse_rejects_bad_lines(self):
        with pytest.raises(ValueError):
            parse_ensemble(["1;2;(x0)"], task="regression")
        with pytest.raises(ValueError):
            parse_ensemble([], task="regression")
