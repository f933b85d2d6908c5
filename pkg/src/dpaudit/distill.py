"""Distilling a discriminated group into a shallow decision tree.

A CART tree (Gini impurity) is fitted to separate the group from the rest
using only the columns of the key attributes. The tree is then pruned along
its minimal cost-complexity sequence for as long as the group it predicts
still satisfies the size constraint, and each leaf is turned into a
conjunctive rule in the original attribute units.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .dataset import ColumnInfo, FeatureMatrix
from .objective import ObjectiveConfig, dscore_hard
from .solver import Evidence

log = logging.getLogger(__name__)

MEMBER = "member"
NON_MEMBER = "non-member"


class DistillError(ValueError):
    pass


@dataclass(frozen=True)
class TreeNode:
    """A node of a binary tree; a leaf when ``column`` is ``None``.

    Rows with ``X[:, column] <= threshold`` go left. Every node keeps the
    counts of the rows reaching it so a pruned node is immediately a leaf.
    """

    count: int
    member_count: int
    fav_count: int = 0
    column: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.column is None

    @property
    def label(self) -> str:
        # majority vote, ties stay non-member
        return MEMBER if 2 * self.member_count > self.count else NON_MEMBER

    @property
    def errors(self) -> int:
        """Misclassified rows if this node were a leaf."""
        if self.label == MEMBER:
            return self.count - self.member_count
        return self.member_count

    def as_leaf(self) -> "TreeNode":
        return TreeNode(self.count, self.member_count, self.fav_count)

    def leaves(self) -> list["TreeNode"]:
        if self.is_leaf:
            return [self]
        return self.left.leaves() + self.right.leaves()

    @property
    def n_leaves(self) -> int:
        return 1 if self.is_leaf else self.left.n_leaves + self.right.n_leaves

    @property
    def depth(self) -> int:
        return 0 if self.is_leaf else 1 + max(self.left.depth, self.right.depth)

    def subtree_errors(self) -> int:
        return sum(leaf.errors for leaf in self.leaves())


def _gini_mass(n, m):
    """``n`` times the Gini impurity of a node with ``m`` members out of ``n``."""
    return 2.0 * m * (n - m) / n


def _best_split(X, y, min_leaf):
    n, d = X.shape
    m = int(y.sum())
    parent = _gini_mass(n, m)
    best = None  # (impurity, column, threshold)
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        cm = np.cumsum(y[order])
        nl = np.arange(1, n)
        valid = (xs[:-1] < xs[1:]) & (nl >= min_leaf) & (n - nl >= min_leaf)
        if not valid.any():
            continue
        nl = nl[valid]
        ml = cm[:-1][valid]
        nr = n - nl
        mr = m - ml
        imp = 2.0 * ml * (nl - ml) / nl + 2.0 * mr * (nr - mr) / nr
        i = int(np.argmin(imp))
        if best is None or imp[i] < best[0]:
            pos = np.flatnonzero(valid)[i]
            best = (float(imp[i]), j, float((xs[pos] + xs[pos + 1]) / 2.0))
    # zero-gain splits are kept (balanced XOR needs one); pruning removes them first
    if best is None or best[0] > parent + 1e-12:
        return None
    return best[1], best[2]


def fit_tree(fm: FeatureMatrix, members, min_leaf: int = 5, fav=None) -> TreeNode:
    """Grow a Gini CART tree separating ``members`` from the other rows.

    Splitting stops at pure nodes, when a child would hold fewer than
    ``min_leaf`` rows, or when every row of the node has the same features. Split ties go to
    the lowest column index, then the lowest threshold. ``fav`` only feeds the
    per-node favorable counts.
    """
    if fm.d == 0:
        raise DistillError("no key attributes to distill")
    X = fm.X
    y = np.asarray(members, dtype=bool).astype(np.int64)
    favv = np.zeros(len(y), dtype=np.int64) if fav is None else np.asarray(fav, dtype=np.int64)
    min_leaf = max(1, int(min_leaf))

    def grow(idx):
        yi = y[idx]
        m = int(yi.sum())
        node = TreeNode(len(idx), m, int(favv[idx].sum()))
        if m == 0 or m == len(idx) or len(idx) < 2 * min_leaf:
            return node
        split = _best_split(X[idx], yi, min_leaf)
        if split is None:
            return node
        j, t = split
        go_left = X[idx, j] <= t
        return replace(node, column=j, threshold=t,
                       left=grow(idx[go_left]), right=grow(idx[~go_left]))

    return grow(np.arange(X.shape[0]))


def apply_tree(root: TreeNode, X) -> list[TreeNode]:
    """Leaf reached by every row of ``X``."""
    X = np.asarray(X)
    out: list = [None] * X.shape[0]

    def walk(node, idx):
        if node.is_leaf:
            for i in idx:
                out[i] = node
            return
        go_left = X[idx, node.column] <= node.threshold
        walk(node.left, idx[go_left])
        walk(node.right, idx[~go_left])

    walk(root, np.arange(X.shape[0]))
    return out


def predict_members(root: TreeNode, X) -> np.ndarray:
    return np.array([leaf.label == MEMBER for leaf in apply_tree(root, X)], dtype=bool)


def _internal_nodes(node, path=""):
    if node.is_leaf:
        return []
    return ([(path, node)] + _internal_nodes(node.left, path + "L")
            + _internal_nodes(node.right, path + "R"))


def _collapse(node, paths, path=""):
    if node.is_leaf:
        return node
    if path in paths:
        return node.as_leaf()
    return replace(node, left=_collapse(node.left, paths, path + "L"),
                   right=_collapse(node.right, paths, path + "R"))


def weakest_link(node: TreeNode, n: int) -> Fraction:
    """``(R(t) - R(T_t)) / (leaves(T_t) - 1)`` with ``R`` = misclassified rows / ``n``."""
    return Fraction(node.errors - node.subtree_errors(), n * (node.n_leaves - 1))


def ccp_sequence(root: TreeNode) -> list[tuple[float, TreeNode]]:
    """Minimal cost-complexity pruning sequence, full tree first, root-only last.

    Each step collapses every internal node whose weakest-link value equals
    the current minimum. Values are compared exactly.
    """
    n = root.count
    seq = [(0.0, root)]
    tree = root
    alpha = Fraction(0)
    while not tree.is_leaf:
        scored = [(weakest_link(node, n), path) for path, node in _internal_nodes(tree)]
        g_min = min(g for g, _ in scored)
        # collapsing an ancestor subsumes any tied descendant
        tied = {p for g, p in scored if g == g_min}
        tree = _collapse(tree, tied)
        alpha = max(alpha, g_min)
        seq.append((float(alpha), tree))
    return seq


@dataclass(frozen=True)
class Rule:
    """One root-to-leaf path as a conjunction of readable predicates.

    ``predicates`` holds ``(attribute, op, value)`` with ``op`` one of
    ``=``, ``!=``, ``<=``, ``>``; continuous values are in original units.
    """

    predicates: tuple[tuple[str, str, object], ...]
    label: str
    support: int
    member_count: int
    fav_count: int

    @property
    def fav_rate(self) -> float:
        return self.fav_count / self.support

    @property
    def member_rate(self) -> float:
        return self.member_count / self.support

    def matches(self, data) -> np.ndarray:
        """Rows of ``data`` satisfying every predicate."""
        mask = np.ones(data.n, dtype=bool)
        for attr, op, value in self.predicates:
            col = data.column(attr)
            if op == "=":
                mask &= col == value
            elif op == "!=":
                mask &= col != value
            elif op == "<=":
                mask &= col <= value
            else:
                mask &= col > value
        return mask

    def conditions(self) -> str:
        if not self.predicates:
            return "TRUE"
        return " AND ".join(f"{a} {op} {format_value(v)}" for a, op, v in self.predicates)

    def __str__(self):
        return (f"IF {self.conditions()} THEN {self.label} "
                f"(support={self.support}, fav_rate={self.fav_rate:.4f})")


def format_value(value) -> str:
    if isinstance(value, float):
        return str(float(f"{value:.6g}"))
    return str(value)


def _simplify(preds, levels=None):
    """Drop predicates implied by others on the same attribute.

    ``levels`` maps a categorical attribute to its values; exclusions that
    leave a single value are rewritten as an equality on it.
    """
    levels = levels or {}
    excluded: dict = {}
    for a, op, v in preds:
        if op == "!=":
            excluded.setdefault(a, set()).add(v)
    remaining = {a: [v for v in levels.get(a, ()) if v not in ex] for a, ex in excluded.items()}
    out = []
    equals = {a for a, op, _ in preds if op == "="}
    upper: dict = {}
    lower: dict = {}
    for a, op, v in preds:
        if op == "<=":
            upper[a] = min(v, upper.get(a, v))
        elif op == ">":
            lower[a] = max(v, lower.get(a, v))
    seen = set()
    for a, op, v in preds:
        if op == "!=" and a in equals:
            continue
        if op == "!=" and len(remaining[a]) == 1:
            if a in equals:
                continue
            equals.add(a)
            op, v = "=", remaining[a][0]
        if op in ("<=", ">"):
            if (a, op) in seen:
                continue
            seen.add((a, op))
            v = upper[a] if op == "<=" else lower[a]
        out.append((a, op, v))
    return tuple(out)


def extract_rules(root: TreeNode, columns: tuple[ColumnInfo, ...]) -> list[Rule]:
    """One rule per leaf, left to right.

    A one-hot split reads ``attribute != value`` on its left branch and
    ``attribute = value`` on its right branch; continuous thresholds are
    mapped back through the column's mean and standard deviation.
    """
    levels: dict = {}
    for info in columns:
        if info.kind == "onehot":
            levels.setdefault(info.attribute, []).append(info.value)
    rules = []

    def walk(node, preds):
        if node.is_leaf:
            rules.append(Rule(_simplify(preds, levels), node.label, node.count,
                              node.member_count, node.fav_count))
            return
        info = columns[node.column]
        if info.kind == "onehot":
            left = (info.attribute, "!=", info.value)
            right = (info.attribute, "=", info.value)
        else:
            t = float(info.to_original(node.threshold))
            left = (info.attribute, "<=", t)
            right = (info.attribute, ">", t)
        walk(node.left, preds + [left])
        walk(node.right, preds + [right])

    walk(root, [])
    return rules


@dataclass
class PrunedTree:
    root: TreeNode
    psi: float
    members_prime: np.ndarray
    dscore_prime: float | None
    rules: list[Rule]
    columns: tuple[ColumnInfo, ...]
    constraint_ok: bool
    size_ratio: float
    sequence: list[tuple[float, TreeNode]] = field(default_factory=list, repr=False)

    @property
    def depth(self) -> int:
        return self.root.depth

    @property
    def member_indices(self) -> list[int]:
        return np.flatnonzero(self.members_prime).tolist()


def default_min_leaf(n: int) -> int:
    return max(5, n // 200)


def translate(fav, fm: FeatureMatrix, evidence: Evidence, obj_cfg: ObjectiveConfig,
              min_leaf: int | None = None) -> PrunedTree:
    """Fit, then prune while the predicted group keeps ``alpha <= |S'|/n <= beta``.

    The pruning sequence is walked in increasing cost-complexity order and the
    last tree before the first violation is returned. If even the unpruned
    tree violates the constraint it is returned with ``constraint_ok=False``.
    """
    if not evidence.key_attributes:
        raise DistillError("no key attributes to distill")
    members = np.asarray(evidence.members, dtype=bool)
    if members.all() or not members.any():
        raise DistillError("discriminated group or its complement is empty")
    fav = np.asarray(fav, dtype=bool)
    sub = fm.restrict(evidence.key_attributes)
    if min_leaf is None:
        min_leaf = default_min_leaf(fm.n)
    root = fit_tree(sub, members, min_leaf, fav)
    seq = ccp_sequence(root)

    def feasible(tree):
        pred = predict_members(tree, sub.X)
        r = pred.sum() / len(pred)
        return obj_cfg.alpha <= r <= obj_cfg.beta, pred, r

    ok, pred, ratio = feasible(seq[0][1])
    chosen = (seq[0][0], seq[0][1], pred, ratio)
    if not ok:
        log.warning("unpruned tree already violates the size constraint (|S'|/n=%.3f)", ratio)
    else:
        for psi, tree in seq[1:]:
            ok_i, pred_i, r_i = feasible(tree)
            if not ok_i:
                break
            chosen = (psi, tree, pred_i, r_i)
    psi, tree, pred, ratio = chosen
    degenerate = pred.all() or not pred.any()
    return PrunedTree(
        root=tree,
        psi=psi,
        members_prime=pred,
        dscore_prime=None if degenerate else dscore_hard(fav, pred),
        rules=extract_rules(tree, sub.columns),
        columns=sub.columns,
        constraint_ok=ok and not degenerate,
        size_ratio=float(ratio),
        sequence=seq,
    )
