"""Gradient-boosted decision trees with logistic loss, built from scratch so
attributions can use exact per-node training covers.

Trees are stored flat: ``feature[i] < 0`` marks node i as a leaf holding
``value[i]`` (already scaled by the learning rate); internal nodes route
``x[feature] <= threshold`` to ``left``, else ``right``. ``cover[i]`` is the
number of training rows that reached node i.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateData, ShapeMismatch

_REG_LAMBDA = 1.0   # L2 on leaf weights, keeps pure-leaf Newton steps finite
_MIN_GAIN = 1e-12


@dataclass
class Tree:
    feature: list[int]
    threshold: list[float]
    left: list[int]
    right: list[int]
    value: list[float]
    cover: list[float]

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def predict_one(self, x: np.ndarray) -> float:
        node = 0
        while not self.is_leaf(node):
            if x[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return self.value[node]

    def expected_value(self) -> float:
        """Cover-weighted mean output (the empty-coalition expectation)."""
        def walk(node: int) -> float:
            if self.is_leaf(node):
                return self.value[node]
            wl = self.cover[self.left[node]] / self.cover[node]
            return wl * walk(self.left[node]) + (1 - wl) * walk(self.right[node])
        return walk(0)

    def max_feature(self) -> int:
        return max((f for f in self.feature if f >= 0), default=-1)


@dataclass
class TreeEnsemble:
    trees: list[Tree] = field(default_factory=list)
    base_score: float = 0.0
    learning_rate: float = 0.1
    n_features: int = 0

    def margin(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n_features,):
            raise ShapeMismatch(
                f"expected {self.n_features} features, got {x.shape}")
        return self.base_score + sum(t.predict_one(x) for t in self.trees)

    def predict_proba(self, x: np.ndarray) -> float:
        """Confidence that x belongs to the positive class."""
        return 1.0 / (1.0 + math.exp(-self.margin(x)))

    def predict(self, x: np.ndarray, threshold: float = 0.5) -> int:
        return int(self.predict_proba(x) >= threshold)

    def to_json(self) -> dict:
        return {
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "n_features": self.n_features,
            "trees": [
                {
                    "feature": t.feature,
                    "threshold": t.threshold,
                    "left": t.left,
                    "right": t.right,
                    "value": t.value,
                    "cover": t.cover,
                }
                for t in self.trees
            ],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "TreeEnsemble":
        ensemble = cls(base_score=payload["base_score"],
                       learning_rate=payload["learning_rate"],
                       n_features=payload["n_features"])
        for t in payload["trees"]:
            ensemble.trees.append(Tree(
                feature=list(t["feature"]),
                threshold=[float(v) for v in t["threshold"]],
                left=list(t["left"]), right=list(t["right"]),
                value=[float(v) for v in t["value"]],
                cover=[float(v) for v in t["cover"]],
            ))
        return ensemble

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "TreeEnsemble":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class GBDTParams:
    n_trees: int = 100
    depth: int = 3
    learning_rate: float = 0.1
    min_leaf: int = 2


def _best_split(x_col: np.ndarray, grad: np.ndarray, order: np.ndarray,
                min_leaf: int) -> tuple[float, float] | None:
    """Best (gain, threshold) for one feature by residual variance reduction."""
    xs = x_col[order]
    gs = grad[order]
    n = len(xs)
    prefix = np.cumsum(gs)
    total = prefix[-1]
    # candidate cut after position i (1-based count on the left)
    counts = np.arange(1, n)
    left_sum = prefix[:-1]
    valid = (xs[1:] != xs[:-1]) & (counts >= min_leaf) & (n - counts >= min_leaf)
    if not valid.any():
        return None
    gain = left_sum ** 2 / counts + (total - left_sum) ** 2 / (n - counts) \
        - total ** 2 / n
    gain = np.where(valid, gain, -np.inf)
    best = int(np.argmax(gain))
    if gain[best] <= _MIN_GAIN:
        return None
    threshold = (xs[best] + xs[best + 1]) / 2.0
    return float(gain[best]), threshold


def _grow_tree(x: np.ndarray, grad: np.ndarray, hess: np.ndarray,
               params: GBDTParams) -> Tree:
    tree = Tree([], [], [], [], [], [])

    def new_node() -> int:
        for lst in (tree.feature, tree.left, tree.right):
            lst.append(-1)
        tree.threshold.append(0.0)
        tree.value.append(0.0)
        tree.cover.append(0.0)
        return len(tree.feature) - 1

    def build(rows: np.ndarray, depth: int) -> int:
        node = new_node()
        tree.cover[node] = float(len(rows))
        g, h = grad[rows], hess[rows]
        if depth >= params.depth or len(rows) < 2 * params.min_leaf:
            tree.value[node] = params.learning_rate * float(
                g.sum() / (h.sum() + _REG_LAMBDA))
            return node
        best = None
        for feat in range(x.shape[1]):
            col = x[rows, feat]
            order = np.argsort(col, kind="stable")
            split = _best_split(col, g, order, params.min_leaf)
            if split and (best is None or split[0] > best[0]):
                best = (split[0], feat, split[1])
        if best is None:
            tree.value[node] = params.learning_rate * float(
                g.sum() / (h.sum() + _REG_LAMBDA))
            return node
        _, feat, threshold = best
        mask = x[rows, feat] <= threshold
        tree.feature[node] = feat
        tree.threshold[node] = threshold
        tree.left[node] = build(rows[mask], depth + 1)
        tree.right[node] = build(rows[~mask], depth + 1)
        return node

    build(np.arange(len(x)), 0)
    return tree


def train_gbdt(features: np.ndarray, labels: np.ndarray,
               params: GBDTParams = GBDTParams()) -> TreeEnsemble:
    """Logistic-loss boosting; deterministic for fixed inputs."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise ShapeMismatch("features must be 2-D with one label per row")
    pos = float(y.sum())
    if pos == 0 or pos == len(y):
        raise DegenerateData("training data has a single class")
    if min(pos, len(y) - pos) < 2:
        raise DegenerateData("need at least 2 samples per class")

    base = math.log(pos / (len(y) - pos))
    ensemble = TreeEnsemble(base_score=base,
                            learning_rate=params.learning_rate,
                            n_features=x.shape[1])
    margins = np.full(len(y), base)
    for _ in range(params.n_trees):
        prob = 1.0 / (1.0 + np.exp(-margins))
        grad = y - prob
        hess = prob * (1.0 - prob)
        tree = _grow_tree(x, grad, hess, params)
        ensemble.trees.append(tree)
        margins += np.array([tree.predict_one(row) for row in x])
    return ensemble
