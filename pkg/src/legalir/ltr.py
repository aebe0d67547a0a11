"""Gradient-boosted regression trees trained with LambdaRank gradients.

Trees are grown best-first (leaf-wise) to a leaf budget with exact greedy
split search over sorted feature values; leaf values are Newton steps
-G/H on the accumulated LambdaRank gradients/hessians. Optimization target
is NDCG@k; the model kept is the one with the best mean validation NDCG.
Everything is deterministic: retraining on identical data yields a
byte-identical model file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

HESSIAN_FLOOR = 1e-16


@dataclass(frozen=True)
class TrainParams:
    learning_rate: float = 0.01
    num_leaves: int = 20
    early_stopping_rounds: int = 100
    max_trees: int = 1000
    ndcg_k: int = 5
    min_samples_per_leaf: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.num_leaves < 2:
            raise ValueError("num_leaves must be >= 2")
        if self.ndcg_k < 1:
            raise ValueError("ndcg_k must be >= 1")
        if self.max_trees < 1:
            raise ValueError("max_trees must be >= 1")
        if self.early_stopping_rounds < 1:
            raise ValueError("early_stopping_rounds must be >= 1")
        if self.min_samples_per_leaf < 1:
            raise ValueError("min_samples_per_leaf must be >= 1")


def _stable_desc_order(scores: np.ndarray) -> np.ndarray:
    """Indices sorting scores descending, ties by ascending original index."""
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")


def ndcg_at_k(labels, scores, k: int) -> float:
    """NDCG@k with gains 2^label - 1 and discount 1/log2(rank+1).

    Groups without a positive label score 1.0 by convention.
    """
    labels = np.asarray(labels, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise ValueError(f"length mismatch: {labels.shape} labels vs {scores.shape} scores")
    if k < 1:
        raise ValueError("k must be >= 1")
    gains = np.power(2.0, labels) - 1.0
    if not np.any(gains > 0):
        return 1.0
    depth = min(k, len(labels))
    discounts = 1.0 / np.log2(np.arange(2, depth + 2))
    order = _stable_desc_order(scores)
    dcg = float(np.sum(gains[order[:depth]] * discounts))
    ideal = float(np.sum(np.sort(gains)[::-1][:depth] * discounts))
    return dcg / ideal


def compute_lambdas(scores, labels, k: int) -> tuple[np.ndarray, np.ndarray]:
    """LambdaRank gradients and hessians for one query group.

    For each pair (i, j) with label_i > label_j the pairwise surrogate is
    |dNDCG@k of swapping i,j| * log(1 + exp(-(s_i - s_j))) with sigma = 1;
    per-row gradients accumulate antisymmetrically and hessians are floored
    at HESSIAN_FLOOR.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = len(scores)
    gradients = np.zeros(n)
    hessians = np.zeros(n)

    gains = np.power(2.0, labels) - 1.0
    order = _stable_desc_order(scores)
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(1, n + 1)
    discounts = np.where(ranks <= k, 1.0 / np.log2(ranks + 1.0), 0.0)

    depth = min(k, n)
    ideal = float(np.sum(np.sort(gains)[::-1][:depth] / np.log2(np.arange(2, depth + 2))))
    if ideal <= 0.0:
        return gradients, np.maximum(hessians, HESSIAN_FLOOR)

    levels = np.unique(labels)
    for high in levels:
        for low in levels:
            if high <= low:
                continue
            hi = np.flatnonzero(labels == high)
            lo = np.flatnonzero(labels == low)
            if len(hi) == 0 or len(lo) == 0:
                continue
            s_diff = scores[hi][:, None] - scores[lo][None, :]
            # rho = 1 / (1 + exp(s_diff)), computed stably for large |s_diff|
            rho = np.where(
                s_diff >= 0,
                np.exp(-np.maximum(s_diff, 0)) / (1.0 + np.exp(-np.maximum(s_diff, 0))),
                1.0 / (1.0 + np.exp(np.minimum(s_diff, 0))),
            )
            delta = (
                np.abs(gains[hi][:, None] - gains[lo][None, :])
                * np.abs(discounts[hi][:, None] - discounts[lo][None, :])
                / ideal
            )
            grad_pair = -rho * delta
            hess_pair = rho * (1.0 - rho) * delta
            np.add.at(gradients, hi, grad_pair.sum(axis=1))
            np.add.at(gradients, lo, -grad_pair.sum(axis=0))
            np.add.at(hessians, hi, hess_pair.sum(axis=1))
            np.add.at(hessians, lo, hess_pair.sum(axis=0))
    return gradients, np.maximum(hessians, HESSIAN_FLOOR)


@dataclass
class RegressionTree:
    """Flat node list; index 0 is the root. Internal nodes hold
    (feature: 1-based id, threshold, left, right) with rule x <= threshold
    going left; leaves hold a value."""

    nodes: list[tuple] = field(default_factory=list)
    n_features: int = 8

    def validate(self) -> None:
        for node in self.nodes:
            if node[0] == "split":
                _, feature, _, left, right = node
                if not 1 <= feature <= self.n_features:
                    raise ValueError(f"feature index {feature} outside [1..{self.n_features}]")
                if not (0 <= left < len(self.nodes) and 0 <= right < len(self.nodes)):
                    raise ValueError("dangling child pointer")
            elif node[0] != "leaf":
                raise ValueError(f"unknown node kind {node[0]!r}")

    def n_leaves(self) -> int:
        return sum(1 for node in self.nodes if node[0] == "leaf")

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.float64)

        def descend(node_id: int, idx: np.ndarray) -> None:
            node = self.nodes[node_id]
            if node[0] == "leaf":
                out[idx] = node[1]
                return
            _, feature, threshold, left, right = node
            mask = X[idx, feature - 1] <= threshold
            if mask.any():
                descend(left, idx[mask])
            if (~mask).any():
                descend(right, idx[~mask])

        if len(X):
            descend(0, np.arange(len(X)))
        return out


class _GrowNode:
    """A leaf under construction during best-first growth. Holds its best
    candidate split (exact greedy over sorted feature values) until expanded."""

    def __init__(
        self, X: np.ndarray, rows: np.ndarray, grad: np.ndarray, hess: np.ndarray, min_samples: int
    ):
        self.rows = rows
        self.left_child: _GrowNode | None = None
        self.right_child: _GrowNode | None = None
        g_total = float(grad[rows].sum())
        h_total = float(hess[rows].sum())
        self.value = -g_total / h_total if h_total > 0 else 0.0
        self.gain = -math.inf
        self.feature = -1
        self.threshold = 0.0
        self.left_rows: np.ndarray | None = None
        self.right_rows: np.ndarray | None = None

        n = len(rows)
        if n < 2 * min_samples:
            return
        parent_score = g_total * g_total / h_total if h_total > 0 else 0.0
        for feature in range(X.shape[1]):
            x = X[rows, feature]
            order = np.argsort(x, kind="stable")
            xs = x[order]
            g_prefix = np.cumsum(grad[rows][order])[:-1]
            h_prefix = np.cumsum(hess[rows][order])[:-1]
            counts = np.arange(1, n)
            valid = (xs[:-1] < xs[1:]) & (counts >= min_samples) & (n - counts >= min_samples)
            if not valid.any():
                continue
            g_right = g_total - g_prefix
            # cancellation can drive a suffix hessian sum to exactly 0; such
            # suffixes carry zero gradient too, so flooring is inert
            h_left = np.maximum(h_prefix, HESSIAN_FLOOR)
            h_right = np.maximum(h_total - h_prefix, HESSIAN_FLOOR)
            gains = np.where(
                valid,
                g_prefix**2 / h_left + g_right**2 / h_right - parent_score,
                -math.inf,
            )
            best = int(np.argmax(gains))
            if gains[best] > self.gain:
                self.gain = float(gains[best])
                self.feature = feature + 1
                self.threshold = float(xs[best])
                self.left_rows = rows[order[: best + 1]]
                self.right_rows = rows[order[best + 1 :]]


def _grow_tree(
    X: np.ndarray, grad: np.ndarray, hess: np.ndarray, params: TrainParams
) -> RegressionTree:
    min_samples = params.min_samples_per_leaf
    root = _GrowNode(X, np.arange(len(X)), grad, hess, min_samples)
    open_leaves = [root]
    while len(open_leaves) < params.num_leaves:
        best_index = -1
        for i, node in enumerate(open_leaves):
            if node.gain > 0 and (best_index < 0 or node.gain > open_leaves[best_index].gain):
                best_index = i
        if best_index < 0:
            break
        node = open_leaves.pop(best_index)
        node.left_child = _GrowNode(X, node.left_rows, grad, hess, min_samples)
        node.right_child = _GrowNode(X, node.right_rows, grad, hess, min_samples)
        open_leaves.extend([node.left_child, node.right_child])

    tree = RegressionTree(n_features=X.shape[1])
    _flatten(root, tree)
    tree.validate()
    return tree


def _flatten(node: _GrowNode, tree: RegressionTree) -> int:
    node_id = len(tree.nodes)
    if node.left_child is None:
        tree.nodes.append(("leaf", node.value))
        return node_id
    tree.nodes.append(None)  # placeholder until children are numbered
    left_id = _flatten(node.left_child, tree)
    right_id = _flatten(node.right_child, tree)
    tree.nodes[node_id] = ("split", node.feature, node.threshold, left_id, right_id)
    return node_id


@dataclass
class RoundRecord:
    round: int
    train_ndcg: float
    valid_ndcg: float
    max_abs_gradient_sum: float


@dataclass
class GbdtModel:
    trees: list[RegressionTree] = field(default_factory=list)
    learning_rate: float = 0.01
    best_iteration: int = 0
    n_features: int = 8
    train_log: list[RoundRecord] = field(default_factory=list)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected shape (n, {self.n_features}), got {X.shape}")
        scores = np.zeros(len(X))
        for tree in self.trees[: self.best_iteration]:
            scores += tree.apply(X)
        return self.learning_rate * scores


def _mean_group_ndcg(labels, scores, slices, k: int) -> float:
    values = [ndcg_at_k(labels[sl], scores[sl], k) for _, sl in slices]
    return float(np.mean(values)) if values else 0.0


def fit(train, valid, params: TrainParams) -> GbdtModel:
    """Boost regression trees on LambdaRank gradients with early stopping on
    mean validation NDCG@k. ``train``/``valid`` are LtrDatasets."""
    if len(train) == 0 or len(valid) == 0:
        raise ValueError("datasets must be non-empty")
    X = train.feature_matrix()
    y = train.labels().astype(np.float64)
    slices = train.group_slices()
    Xv = valid.feature_matrix()
    yv = valid.labels().astype(np.float64)
    slices_v = valid.group_slices()
    if X.shape[1] != Xv.shape[1]:
        raise ValueError("train and validation feature arity differ")

    model = GbdtModel(learning_rate=params.learning_rate, n_features=X.shape[1])
    train_scores = np.zeros(len(X))
    valid_scores = np.zeros(len(Xv))
    best_ndcg = -math.inf
    best_round = 0

    for round_number in range(1, params.max_trees + 1):
        grad = np.empty(len(X))
        hess = np.empty(len(X))
        max_abs_sum = 0.0
        for _, sl in slices:
            g, h = compute_lambdas(train_scores[sl], y[sl], params.ndcg_k)
            grad[sl] = g
            hess[sl] = h
            max_abs_sum = max(max_abs_sum, abs(float(g.sum())))
        if max_abs_sum > 1e-8:
            raise AssertionError(f"per-group gradient sum {max_abs_sum} exceeds 1e-8")

        tree = _grow_tree(X, grad, hess, params)
        model.trees.append(tree)
        train_scores += params.learning_rate * tree.apply(X)
        valid_scores += params.learning_rate * tree.apply(Xv)

        train_ndcg = _mean_group_ndcg(y, train_scores, slices, params.ndcg_k)
        valid_ndcg = _mean_group_ndcg(yv, valid_scores, slices_v, params.ndcg_k)
        model.train_log.append(
            RoundRecord(round_number, train_ndcg, valid_ndcg, max_abs_sum)
        )
        if valid_ndcg > best_ndcg:
            best_ndcg = valid_ndcg
            best_round = round_number
        if round_number - best_round >= params.early_stopping_rounds:
            break

    model.best_iteration = best_round
    return model


def predict(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


MODEL_FORMAT = "gbdt-model"
MODEL_VERSION = 1


def save_model(model: GbdtModel, file_path: str | Path, provenance: dict | None = None) -> None:
    lines = []
    if provenance:
        for key in sorted(provenance):
            lines.append(f"# {key}={provenance[key]}")
    lines.append(f"{MODEL_FORMAT} v{MODEL_VERSION}")
    lines.append(f"learning_rate {model.learning_rate!r}")
    lines.append(f"num_features {model.n_features}")
    lines.append(f"best_iteration {model.best_iteration}")
    lines.append(f"num_trees {len(model.trees)}")
    for i, tree in enumerate(model.trees):
        lines.append(f"tree {i} {len(tree.nodes)}")
        for node_id, node in enumerate(tree.nodes):
            if node[0] == "leaf":
                lines.append(f"leaf {node_id} {node[1]!r}")
            else:
                _, feature, threshold, left, right = node
                lines.append(f"node {node_id} {feature} {threshold!r} {left} {right}")
    Path(file_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_train_log(model: GbdtModel, file_path: str | Path) -> None:
    lines = ["# round\ttrain_ndcg\tvalid_ndcg\tmax_abs_gradient_sum"]
    for record in model.train_log:
        lines.append(
            f"{record.round}\t{record.train_ndcg:.6f}\t{record.valid_ndcg:.6f}"
            f"\t{record.max_abs_gradient_sum:.3e}"
        )
    Path(file_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(file_path: str | Path) -> GbdtModel:
    path = Path(file_path)
    lines = [
        line for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if not lines or lines[0] != f"{MODEL_FORMAT} v{MODEL_VERSION}":
        raise ValueError(f"{path}: unsupported model header")

    def take(prefix: str, line: str) -> str:
        if not line.startswith(prefix + " "):
            raise ValueError(f"{path}: expected '{prefix}', got {line!r}")
        return line[len(prefix) + 1 :]

    learning_rate = float(take("learning_rate", lines[1]))
    n_features = int(take("num_features", lines[2]))
    best_iteration = int(take("best_iteration", lines[3]))
    num_trees = int(take("num_trees", lines[4]))

    model = GbdtModel(
        learning_rate=learning_rate, best_iteration=best_iteration, n_features=n_features
    )
    cursor = 5
    for _ in range(num_trees):
        header = lines[cursor].split()
        if header[0] != "tree":
            raise ValueError(f"{path}: expected tree header, got {lines[cursor]!r}")
        n_nodes = int(header[2])
        cursor += 1
        tree = RegressionTree(n_features=n_features)
        for _ in range(n_nodes):
            parts = lines[cursor].split()
            cursor += 1
            if parts[0] == "leaf":
                tree.nodes.append(("leaf", float(parts[2])))
            elif parts[0] == "node":
                tree.nodes.append(
                    ("split", int(parts[2]), float(parts[3]), int(parts[4]), int(parts[5]))
                )
            else:
                raise ValueError(f"{path}: bad node line {parts!r}")
        tree.validate()
        model.trees.append(tree)
    return model
