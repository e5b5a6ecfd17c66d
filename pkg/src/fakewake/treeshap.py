"""Exact additive feature attributions for tree ensembles.

Path-dependent formulation: absent features are marginalized by descending
both branches weighted by training covers, so no background dataset is
needed. Attributions live in margin (log-odds) space and satisfy
``base_value + sum(contributions) == margin(x)`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .gbdt import Tree, TreeEnsemble


@dataclass(frozen=True)
class ShapExplanation:
    contributions: np.ndarray   # one value per feature, margin space
    base_value: float
    margin: float

    def check_identity(self, tol: float = 1e-9) -> bool:
        return abs(self.base_value + float(self.contributions.sum())
                   - self.margin) <= tol


class _Path:
    """Unique-feature path with subset-size weights (one list per field)."""

    __slots__ = ("d", "z", "o", "w")

    def __init__(self):
        self.d: list[int] = []
        self.z: list[float] = []
        self.o: list[float] = []
        self.w: list[float] = []

    def copy(self) -> "_Path":
        fresh = _Path.__new__(_Path)
        fresh.d = self.d.copy()
        fresh.z = self.z.copy()
        fresh.o = self.o.copy()
        fresh.w = self.w.copy()
        return fresh


def _extend(path: _Path, pz: float, po: float, pi: int):
    length = len(path.d) + 1
    path.d.append(pi)
    path.z.append(pz)
    path.o.append(po)
    path.w.append(1.0 if length == 1 else 0.0)
    for i in range(length - 2, -1, -1):
        path.w[i + 1] += po * path.w[i] * (i + 1) / length
        path.w[i] = pz * path.w[i] * (length - 1 - i) / length


def _unwind(path: _Path, index: int) -> _Path:
    length = len(path.d)
    out = path.copy()
    one = out.o[index]
    zero = out.z[index]
    tail = out.w[length - 1]
    for j in range(length - 2, -1, -1):
        if one != 0:
            keep = out.w[j]
            out.w[j] = tail * length / ((j + 1) * one)
            tail = keep - out.w[j] * zero * (length - 1 - j) / length
        else:
            out.w[j] = out.w[j] * length / (zero * (length - 1 - j))
    for j in range(index, length - 1):
        out.d[j] = out.d[j + 1]
        out.z[j] = out.z[j + 1]
        out.o[j] = out.o[j + 1]
    out.d.pop()
    out.z.pop()
    out.o.pop()
    out.w.pop()
    return out


def _unwound_sum(path: _Path, index: int) -> float:
    """sum(unwind(path, index).w) without materializing the unwound path."""
    length = len(path.d)
    one = path.o[index]
    zero = path.z[index]
    total = 0.0
    tail = path.w[length - 1]
    for j in range(length - 2, -1, -1):
        if one != 0:
            part = tail * length / ((j + 1) * one)
            total += part
            tail = path.w[j] - part * zero * (length - 1 - j) / length
        else:
            total += path.w[j] * length / (zero * (length - 1 - j))
    return total


def _tree_shap(tree: Tree, x: np.ndarray, phi: np.ndarray):
    def recurse(node: int, path: _Path, pz: float, po: float, pi: int):
        path = path.copy()
        _extend(path, pz, po, pi)
        if tree.is_leaf(node):
            for i in range(1, len(path.d)):
                weight = _unwound_sum(path, i)
                phi[path.d[i]] += weight * (path.o[i] - path.z[i]) * tree.value[node]
            return
        feat = tree.feature[node]
        if x[feat] <= tree.threshold[node]:
            hot, cold = tree.left[node], tree.right[node]
        else:
            hot, cold = tree.right[node], tree.left[node]
        iz = io = 1.0
        found = -1
        for i in range(1, len(path.d)):
            if path.d[i] == feat:
                found = i
                break
        if found >= 0:
            iz, io = path.z[found], path.o[found]
            path = _unwind(path, found)
        cover = tree.cover[node]
        recurse(hot, path, iz * tree.cover[hot] / cover, io, feat)
        recurse(cold, path, iz * tree.cover[cold] / cover, 0.0, feat)

    recurse(0, _Path(), 1.0, 1.0, -1)


def shap_values(model: TreeEnsemble, x: np.ndarray) -> ShapExplanation:
    """Per-feature contributions for one sample, summed over all trees."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise ShapeMismatch(f"expected {model.n_features} features, got {x.shape}")
    phi = np.zeros(model.n_features)
    base = model.base_score
    for tree in model.trees:
        _tree_shap(tree, x, phi)
        base += tree.expected_value()
    return ShapExplanation(contributions=phi, base_value=base,
                           margin=model.margin(x))
