"""Fitness evaluation over bootstrap samples, with optional linear scaling.

The fast route evaluates a tree on the full training set once and derives
every per-sample fitness by fancy-indexing that shared output vector with
the stored bootstrap indices: O(n * (size + beta)) instead of the naive
O(beta * size * n).  ``evaluate_naive`` re-runs the tree per sample and
exists as an oracle; both routes must agree to floating-point noise.

Linear scaling fits, per sample, the least-squares affine map a + b * o of
tree outputs o onto labels y:

    b = sum((y - mean(y)) * (o - mean(o))) / sum((o - mean(o))^2)
    a = mean(y) - b * mean(o)

A zero (or non-finite) denominator degenerates to b = 0, a = mean(y);
with scaling disabled a = 0, b = 1.  Classification applies the scaled
output through a 0.5 threshold, and fitness is the error rate; regression
fitness is the mean squared error.  Losses saturate at the float64 maximum
so they stay finite even for saturated tree outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .datasets import Dataset, BootstrapPlan, _check_task
from .trees import Tree, eval_tree_outputs, FLOAT_MAX


@dataclass(frozen=True, eq=False)
class EvaluatedIndividual:
    """A tree together with everything selection and archiving need.

    ``losses``, ``a``, and ``b`` are per-bootstrap-sample arrays of length
    beta; ``full_*`` is the same computation on the unresampled training
    set.  ``node_evals`` counts the node evaluations spent on the
    per-sample fitness computation.
    """

    tree: Tree
    losses: np.ndarray
    a: np.ndarray
    b: np.ndarray
    full_loss: float
    full_a: float
    full_b: float
    node_evals: int

    def __post_init__(self) -> None:
        for name in ("losses", "a", "b"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def beta(self) -> int:
        return self.losses.shape[0]


def linear_scaling_coeffs(y: np.ndarray, o: np.ndarray) -> tuple[float, float]:
    """Least-squares intercept and slope mapping outputs o onto labels y."""
    y = np.asarray(y, dtype=np.float64)
    o = np.asarray(o, dtype=np.float64)
    with np.errstate(all="ignore"):
        y_bar = y.mean()
        o_bar = o.mean()
        do = o - o_bar
        den = np.sum(do * do)
        if den == 0.0:
            return float(y_bar), 0.0
        b = np.sum((y - y_bar) * do) / den
        a = y_bar - b * o_bar
    if not (np.isfinite(a) and np.isfinite(b)):
        return float(y_bar), 0.0
    return float(a), float(b)


def _coeff_rows(
    Y: np.ndarray, O: np.ndarray, use_scaling: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise linear-scaling coefficients for matrices of samples."""
    beta = Y.shape[0]
    if not use_scaling:
        return np.zeros(beta), np.ones(beta)
    with np.errstate(all="ignore"):
        y_bar = Y.mean(axis=1)
        o_bar = O.mean(axis=1)
        do = O - o_bar[:, None]
        den = np.sum(do * do, axis=1)
        b = np.where(den == 0.0, 0.0, np.sum((Y - y_bar[:, None]) * do, axis=1)
                     / np.where(den == 0.0, 1.0, den))
        a = y_bar - b * o_bar
    bad = ~(np.isfinite(a) & np.isfinite(b))
    if np.any(bad):
        a = np.where(bad, y_bar, a)
        b = np.where(bad, 0.0, b)
    return a, b


def _losses_from_scaled(
    Y: np.ndarray, scaled: np.ndarray, task: str, axis: int | None
) -> np.ndarray | float:
    if task == "classification":
        preds = (scaled >= 0.5).astype(np.float64)
        return np.mean(preds != Y, axis=axis)
    with np.errstate(all="ignore"):
        diff = Y - scaled
        loss = np.mean(diff * diff, axis=axis)
    return np.minimum(np.nan_to_num(loss, nan=FLOAT_MAX, posinf=FLOAT_MAX), FLOAT_MAX)


def round_and_clamp(value: float) -> int:
    """Threshold a scaled output into a class label: below 0.5 gives 0."""
    return 0 if value < 0.5 else 1


def evaluate_individual(
    tree: Tree,
    train: Dataset,
    plan: BootstrapPlan,
    use_scaling: bool = True,
) -> EvaluatedIndividual:
    """Shared-output evaluation: one tree pass, beta fitness values."""
    _check_task(train.task)
    outputs, node_evals = eval_tree_outputs(tree, train.features)
    O = outputs[plan.indices]
    Y = train.labels[plan.indices]
    a, b = _coeff_rows(Y, O, use_scaling)
    with np.errstate(all="ignore"):
        scaled = np.clip(a[:, None] + b[:, None] * O, -FLOAT_MAX, FLOAT_MAX)
    losses = np.asarray(_losses_from_scaled(Y, scaled, train.task, axis=1))
    if use_scaling:
        full_a, full_b = linear_scaling_coeffs(train.labels, outputs)
    else:
        full_a, full_b = 0.0, 1.0
    with np.errstate(all="ignore"):
        full_scaled = np.clip(full_a + full_b * outputs, -FLOAT_MAX, FLOAT_MAX)
    full_loss = float(_losses_from_scaled(train.labels, full_scaled, train.task, axis=None))
    return EvaluatedIndividual(
        tree=tree, losses=losses, a=a, b=b,
        full_loss=full_loss, full_a=full_a, full_b=full_b,
        node_evals=node_evals,
    )


def evaluate_naive(
    tree: Tree,
    train: Dataset,
    plan: BootstrapPlan,
    use_scaling: bool = True,
) -> EvaluatedIndividual:
    """Oracle evaluation: materializes every bootstrap sample and re-runs
    the tree on each, spending exactly beta * size * n_rows node
    evaluations on the per-sample fitness computation.  Results must match
    :func:`evaluate_individual` up to floating-point noise."""
    _check_task(train.task)
    beta = plan.beta
    losses = np.empty(beta)
    a = np.empty(beta)
    b = np.empty(beta)
    node_evals = 0
    for j in range(beta):
        idx = plan.indices[j]
        yj = train.labels[idx]
        oj, ne = eval_tree_outputs(tree, train.features[idx])
        node_evals += ne
        if use_scaling:
            a[j], b[j] = linear_scaling_coeffs(yj, oj)
        else:
            a[j], b[j] = 0.0, 1.0
        with np.errstate(all="ignore"):
            scaled = np.clip(a[j] + b[j] * oj, -FLOAT_MAX, FLOAT_MAX)
        losses[j] = float(_losses_from_scaled(yj, scaled, train.task, axis=None))
    # The full-train quantities are identical in both routes, so they sit
    # outside the counted per-sample cost.
    outputs, _ = eval_tree_outputs(tree, train.features)
    if use_scaling:
        full_a, full_b = linear_scaling_coeffs(train.labels, outputs)
    else:
        full_a, full_b = 0.0, 1.0
    with np.errstate(all="ignore"):
        full_scaled = np.clip(full_a + full_b * outputs, -FLOAT_MAX, FLOAT_MAX)
    full_loss = float(_losses_from_scaled(train.labels, full_scaled, train.task, axis=None))
    return EvaluatedIndividual(
        tree=tree, losses=losses, a=a, b=b,
        full_loss=full_loss, full_a=full_a, full_b=full_b,
        node_evals=node_evals,
    )


def evaluate_population(
    trees: Sequence[Tree],
    train: Dataset,
    plan: BootstrapPlan,
    use_scaling: bool = True,
) -> list[EvaluatedIndividual]:
    return [evaluate_individual(t, train, plan, use_scaling) for t in trees]


def evaluate_full(
    tree: Tree, train: Dataset, use_scaling: bool = True
) -> EvaluatedIndividual:
    """Evaluate on the unresampled training set only (the conventional-GP
    fitness).  The per-sample vectors collapse to the single full-train
    value, so selection code can treat both shapes uniformly."""
    _check_task(train.task)
    outputs, node_evals = eval_tree_outputs(tree, train.features)
    if use_scaling:
        full_a, full_b = linear_scaling_coeffs(train.labels, outputs)
    else:
        full_a, full_b = 0.0, 1.0
    with np.errstate(all="ignore"):
        scaled = np.clip(full_a + full_b * outputs, -FLOAT_MAX, FLOAT_MAX)
    full_loss = float(_losses_from_scaled(train.labels, scaled, train.task, axis=None))
    return EvaluatedIndividual(
        tree=tree,
        losses=np.array([full_loss]),
        a=np.array([full_a]),
        b=np.array([full_b]),
        full_loss=full_loss, full_a=full_a, full_b=full_b,
        node_evals=node_evals,
    )
