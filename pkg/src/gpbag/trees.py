"""Expression trees: primitives, generation, variation, and evaluation.

Trees are stored as immutable preorder (prefix) tuples of primitives.  The
function set is {+, -, *, protected division, protected sqrt, protected
log}; terminals are feature references and ephemeral random constants.

Protected semantics (eps = 1e-10, with sign(0) taken as +1):

    pdiv(a, b)  = a * sign(b) / (|b| + eps)
    psqrt(x)    = sqrt(|x|)
    plog(x)     = log(|x| + eps)

Arithmetic results saturate at the float64 maximum instead of overflowing,
so evaluation never produces non-finite values from finite inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PROTECTED_EPS = 1e-10
FLOAT_MAX = float(np.finfo(np.float64).max)
DEFAULT_MAX_NODES = 500


@dataclass(frozen=True)
class Primitive:
    """A single tree node: function, feature reference, or constant."""

    kind: str
    arity: int
    index: int = -1  # feature column, when kind == "feature"
    value: float = 0.0  # constant value, when kind == "constant"


ADD = Primitive("add", 2)
SUB = Primitive("sub", 2)
MUL = Primitive("mul", 2)
PDIV = Primitive("pdiv", 2)
PSQRT = Primitive("psqrt", 1)
PLOG = Primitive("plog", 1)

FUNCTIONS: tuple[Primitive, ...] = (ADD, SUB, MUL, PDIV, PSQRT, PLOG)

_TOKENS = {"add": "+", "sub": "-", "mul": "*", "pdiv": "pdiv",
           "psqrt": "psqrt", "plog": "plog"}
_FUNCTIONS_BY_TOKEN = {_TOKENS[f.kind]: f for f in FUNCTIONS}


def feature(index: int) -> Primitive:
    if index < 0:
        raise ValueError("feature index must be non-negative")
    return Primitive("feature", 0, index=index)


def constant(value: float) -> Primitive:
    return Primitive("constant", 0, value=float(value))


class Tree:
    """An immutable expression tree over a preorder tuple of primitives.

    The constructor validates arity consistency (every function receives
    exactly its arity of subtrees and no nodes are left over) and computes
    per-node depths in the same pass.
    """

    __slots__ = ("nodes", "depths", "_hash")

    def __init__(self, nodes: Sequence[Primitive]):
        nodes = tuple(nodes)
        if not nodes:
            raise ValueError("a tree needs at least one node")
        depths = np.empty(len(nodes), dtype=np.int32)
        pending = [0]  # depths of nodes still expected, last one next
        for i, node in enumerate(nodes):
            if not pending:
                raise ValueError(f"malformed tree: extra node at position {i}")
            d = pending.pop()
            depths[i] = d
            pending.extend([d + 1] * node.arity)
        if pending:
            raise ValueError("malformed tree: missing subtrees")
        depths.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "depths", depths)
        object.__setattr__(self, "_hash", hash(nodes))

    def __setattr__(self, name, value):
        raise AttributeError("Tree is immutable")

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def height(self) -> int:
        """Longest root-to-leaf path, counted in edges."""
        return int(self.depths.max())

    def __reduce__(self):
        return (Tree, (self.nodes,))

    def __eq__(self, other) -> bool:
        return isinstance(other, Tree) and self.nodes == other.nodes

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Tree({format_tree(self)})"

    def subtree_span(self, i: int) -> tuple[int, int]:
        """Half-open preorder range [i, end) of the subtree rooted at i."""
        if not 0 <= i < len(self.nodes):
            raise IndexError(f"node index {i} out of range")
        need = 1
        j = i
        while need:
            need += self.nodes[j].arity - 1
            j += 1
        return i, j

    def subtree(self, i: int) -> tuple[Primitive, ...]:
        lo, hi = self.subtree_span(i)
        return self.nodes[lo:hi]

    def replace_subtree(self, i: int, replacement: Sequence[Primitive]) -> "Tree":
        lo, hi = self.subtree_span(i)
        return Tree(self.nodes[:lo] + tuple(replacement) + self.nodes[hi:])


def eval_tree_outputs(tree: Tree, features: np.ndarray) -> tuple[np.ndarray, int]:
    """Evaluate a tree on every row of ``features`` in one vectorized pass.

    Returns (outputs, node_evals) where outputs has shape (n_rows,) and
    node_evals counts node evaluations: exactly tree.size * n_rows.
    """
    n = features.shape[0]
    stack: list = []
    # Walking the prefix form backwards means operands are on the stack
    # (in order) by the time their operator is reached.  Overflow is
    # expected (results saturate at the float maximum), so its warnings
    # are silenced for the pass.
    with np.errstate(over="ignore", invalid="ignore"):
        for node in reversed(tree.nodes):
            kind = node.kind
            if kind == "feature":
                stack.append(features[:, node.index])
            elif kind == "constant":
                stack.append(node.value)
            elif kind == "psqrt":
                stack.append(np.sqrt(np.abs(stack.pop())))
            elif kind == "plog":
                stack.append(np.log(np.abs(stack.pop()) + PROTECTED_EPS))
            else:
                a = stack.pop()
                b = stack.pop()
                if kind == "add":
                    out = a + b
                elif kind == "sub":
                    out = a - b
                elif kind == "mul":
                    out = a * b
                elif kind == "pdiv":
                    sign = np.where(np.less(b, 0.0), -1.0, 1.0)
                    out = a * sign / (np.abs(b) + PROTECTED_EPS)
                else:
                    raise ValueError(f"unknown primitive kind {kind!r}")
                out = np.clip(out, -FLOAT_MAX, FLOAT_MAX)
                stack.append(out)
    result = stack.pop()
    if stack:
        raise AssertionError("evaluation stack not empty")
    if np.ndim(result) == 0:
        result = np.full(n, float(result))
    return np.asarray(result, dtype=np.float64), tree.size * n


@dataclass(frozen=True)
class VariationConfig:
    """Knobs for initialization and variation."""

    crossover_prob: float = 0.5  # otherwise subtree mutation
    max_nodes: int = DEFAULT_MAX_NODES
    init_min_height: int = 2
    init_max_height: int = 6
    erc_low: float = -5.0
    erc_high: float = 5.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError("crossover_prob must be in [0, 1]")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be positive")
        if not 0 <= self.init_min_height <= self.init_max_height:
            raise ValueError("need 0 <= init_min_height <= init_max_height")
        if not self.erc_low < self.erc_high:
            raise ValueError("need erc_low < erc_high")


def _random_terminal(
    n_features: int, cfg: VariationConfig, rng: np.random.Generator
) -> Primitive:
    # One constant slot next to the n_features feature slots, all uniform.
    k = int(rng.integers(n_features + 1))
    if k < n_features:
        return feature(k)
    return constant(float(rng.uniform(cfg.erc_low, cfg.erc_high)))


def grow_nodes(
    target_height: int,
    n_features: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
    functions: Sequence[Primitive] = FUNCTIONS,
) -> list[Primitive]:
    """Grow-style generation: below the minimum height only functions are
    drawn, at the target height only terminals, in between a fair coin
    decides."""

    def build(depth: int, out: list[Primitive]) -> None:
        if depth >= target_height:
            out.append(_random_terminal(n_features, cfg, rng))
            return
        if depth >= cfg.init_min_height and rng.random() >= 0.5:
            out.append(_random_terminal(n_features, cfg, rng))
            return
        fn = functions[int(rng.integers(len(functions)))]
        out.append(fn)
        for _ in range(fn.arity):
            build(depth + 1, out)

    out: list[Primitive] = []
    build(0, out)
    return out


def full_nodes(
    target_height: int,
    n_features: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
    functions: Sequence[Primitive] = FUNCTIONS,
) -> list[Primitive]:
    """Full-style generation: functions everywhere above the target height."""

    def build(depth: int, out: list[Primitive]) -> None:
        if depth >= target_height:
            out.append(_random_terminal(n_features, cfg, rng))
            return
        fn = functions[int(rng.integers(len(functions)))]
        out.append(fn)
        for _ in range(fn.arity):
            build(depth + 1, out)

    out: list[Primitive] = []
    build(0, out)
    return out


def init_ramped_half_and_half(
    pop_size: int,
    n_features: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
) -> list[Tree]:
    """Ramped half-and-half initialization.

    Slots cycle through the height ramp in pairs (slot i gets height
    min + (i // 2) % n_heights); even slots use full, odd slots grow.
    """
    if pop_size < 1:
        raise ValueError("pop_size must be positive")
    heights = list(range(cfg.init_min_height, cfg.init_max_height + 1))
    trees = []
    for i in range(pop_size):
        h = heights[(i // 2) % len(heights)]
        maker = full_nodes if i % 2 == 0 else grow_nodes
        trees.append(Tree(maker(h, n_features, cfg, rng)))
    return trees


def select_node_uniform_depth(tree: Tree, rng: np.random.Generator) -> int:
    """Pick a node by first drawing a depth uniformly over 0..height, then a
    node uniformly among the nodes at that depth."""
    depth = int(rng.integers(tree.height + 1))
    candidates = np.flatnonzero(tree.depths == depth)
    return int(candidates[int(rng.integers(len(candidates)))])


def subtree_crossover(
    parent1: Tree,
    parent2: Tree,
    rng: np.random.Generator,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Tree:
    """Replace a uniform-depth node of parent1 with a uniform-depth subtree
    of parent2; if the child would exceed max_nodes, parent1 is returned."""
    i = select_node_uniform_depth(parent1, rng)
    j = select_node_uniform_depth(parent2, rng)
    donor = parent2.subtree(j)
    lo, hi = parent1.subtree_span(i)
    if len(parent1.nodes) - (hi - lo) + len(donor) > max_nodes:
        return parent1
    return Tree(parent1.nodes[:lo] + donor + parent1.nodes[hi:])


def subtree_mutation(
    parent: Tree,
    n_features: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
) -> Tree:
    """Replace a uniform-depth node with a freshly grown subtree whose target
    height is drawn uniformly from the initialization ramp."""
    i = select_node_uniform_depth(parent, rng)
    h = int(rng.integers(cfg.init_min_height, cfg.init_max_height + 1))
    donor = grow_nodes(h, n_features, cfg, rng)
    lo, hi = parent.subtree_span(i)
    if len(parent.nodes) - (hi - lo) + len(donor) > cfg.max_nodes:
        return parent
    return Tree(parent.nodes[:lo] + tuple(donor) + parent.nodes[hi:])


def vary_population(
    parents: Sequence[Tree],
    n_features: int,
    cfg: VariationConfig,
    rng: np.random.Generator,
) -> list[Tree]:
    """Produce one offspring per parent slot.

    Slot i's offspring descends from parents[i] (its parent of record): a
    fair coin picks subtree crossover (second parent drawn uniformly from
    the whole parent list, self included) or subtree mutation.
    """
    if len(parents) < 2:
        raise ValueError("variation needs at least two parents")
    offspring = []
    for i in range(len(parents)):
        if rng.random() < cfg.crossover_prob:
            partner = parents[int(rng.integers(len(parents)))]
            child = subtree_crossover(parents[i], partner, rng, cfg.max_nodes)
        else:
            child = subtree_mutation(parents[i], n_features, cfg, rng)
        offspring.append(child)
    return offspring


def format_tree(tree: Tree) -> str:
    """Render a tree in parenthesized prefix form, e.g.
    ``(+ (x0) (plog (c:1.25)))``.  Constants keep 17 significant digits, so
    parsing the text reproduces the tree exactly."""
    out: list[str] = []

    def emit(i: int) -> int:
        node = tree.nodes[i]
        if node.kind == "feature":
            out.append(f"(x{node.index})")
            return i + 1
        if node.kind == "constant":
            out.append(f"(c:{node.value:.17g})")
            return i + 1
        out.append(f"({_TOKENS[node.kind]}")
        j = i + 1
        for _ in range(node.arity):
            out.append(" ")
            j = emit(j)
        out.append(")")
        return j

    emit(0)
    return "".join(out)


def parse_tree(text: str) -> Tree:
    """Parse the prefix text form produced by :func:`format_tree`."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    nodes: list[Primitive] = []
    depth = 0
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "(":
            depth += 1
            i += 1
            if i >= len(tokens):
                raise ValueError("unexpected end of tree text")
            head = tokens[i]
            if head in _FUNCTIONS_BY_TOKEN:
                nodes.append(_FUNCTIONS_BY_TOKEN[head])
            elif head.startswith("x"):
                nodes.append(feature(int(head[1:])))
            elif head.startswith("c:"):
                nodes.append(constant(float(head[2:])))
            else:
                raise ValueError(f"unknown token {head!r}")
            i += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced parentheses")
            i += 1
        else:
            raise ValueError(f"unexpected token {tok!r}")
    if depth != 0:
        raise ValueError("unbalanced parentheses")
    return Tree(nodes)
