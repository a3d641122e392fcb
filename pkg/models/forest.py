"""
Случайный лес из CART-деревьев (критерий Джини)

Недифференцируемая модель: атаковать ее можно только безградиентным солвером.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import scipy.sparse as sp

from models.base import TrainedModel, frozen_array
from models.specs import ModelSpec

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass
class _TreeBuilder:
    """Наращивает узлы одного дерева в плоских списках"""

    n_classes: int
    max_depth: int
    rng: np.random.Generator
    feature: List[int] = field(default_factory=list)
    threshold: List[float] = field(default_factory=list)
    left: List[int] = field(default_factory=list)
    right: List[int] = field(default_factory=list)
    value: List[np.ndarray] = field(default_factory=list)

    def _new_node(self, y: np.ndarray) -> int:
        counts = np.bincount(y, minlength=self.n_classes).astype(np.float64)
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(counts / counts.sum())
        return len(self.feature) - 1

    def _best_split(self, X: np.ndarray, y: np.ndarray):
        n, d = X.shape
        n_candidates = max(1, int(np.sqrt(d)))
        candidates = self.rng.choice(d, size=n_candidates, replace=False)
        best = None
        best_impurity = np.inf
        for j in candidates:
            order = np.argsort(X[:, j], kind="stable")
            values = X[order, j]
            onehot = np.eye(self.n_classes)[y[order]]
            left_counts = np.cumsum(onehot, axis=0)[:-1]
            right_counts = onehot.sum(axis=0) - left_counts
            n_left = np.arange(1, n)
            n_right = n - n_left
            gini_left = 1.0 - np.sum(left_counts ** 2, axis=1) / n_left ** 2
            gini_right = 1.0 - np.sum(right_counts ** 2, axis=1) / n_right ** 2
            impurity = (n_left * gini_left + n_right * gini_right) / n
            # порог допустим только между различными значениями
            impurity[values[1:] <= values[:-1]] = np.inf
            k = int(np.argmin(impurity))
            if impurity[k] < best_impurity:
                best_impurity = impurity[k]
                best = (int(j), 0.5 * (values[k] + values[k + 1]))
        return best

    def grow(self, X: np.ndarray, y: np.ndarray, depth: int = 0) -> int:
        node = self._new_node(y)
        if depth >= self.max_depth or len(y) < 2 or np.all(y == y[0]):
            return node
        split = self._best_split(X, y)
        if split is None:
            return node
        j, t = split
        mask = X[:, j] <= t
        self.feature[node] = j
        self.threshold[node] = t
        self.left[node] = self.grow(X[mask], y[mask], depth + 1)
        self.right[node] = self.grow(X[~mask], y[~mask], depth + 1)
        return node


class RandomForestModel(TrainedModel):
    """
    Лес хранится плоскими массивами узлов всех деревьев; в tree_offsets лежат
    индексы корней. Оценки равны средним распределения классов в листьях.
    """

    def __init__(self, spec: ModelSpec, n_features: int, feature, threshold, left, right, value, tree_offsets):
        value = frozen_array(np.atleast_2d(value))
        super().__init__(spec, value.shape[1], n_features)
        self.feature = frozen_array(feature, dtype=np.int64)
        self.threshold = frozen_array(threshold)
        self.left = frozen_array(left, dtype=np.int64)
        self.right = frozen_array(right, dtype=np.int64)
        self.value = value
        self.tree_offsets = frozen_array(tree_offsets, dtype=np.int64)

    def _leaves(self, X: np.ndarray, root: int) -> np.ndarray:
        nodes = np.full(X.shape[0], root, dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[nodes] != LEAF
        while np.any(active):
            current = nodes[active]
            go_left = X[rows[active], self.feature[current]] <= self.threshold[current]
            nodes[active] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[nodes] != LEAF
        return nodes

    def _scores(self, X) -> np.ndarray:
        X = X.toarray() if sp.issparse(X) else np.asarray(X)
        total = np.zeros((X.shape[0], self.n_classes))
        for root in self.tree_offsets:
            total += self.value[self._leaves(X, int(root))]
        return total / len(self.tree_offsets)

    def get_params(self) -> Dict[str, np.ndarray]:
        return {
            "feature": self.feature, "threshold": self.threshold, "left": self.left,
            "right": self.right, "value": self.value, "tree_offsets": self.tree_offsets,
        }

    @classmethod
    def from_params(cls, spec, n_classes, n_features, params):
        value = np.reshape(params["value"], (-1, n_classes))
        return cls(spec, n_features, params["feature"], params["threshold"], params["left"],
                   params["right"], value, params["tree_offsets"])


def train_forest(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> RandomForestModel:
    rng = np.random.default_rng(spec.seed)
    n = X.shape[0]
    feature, threshold, left, right, value, offsets = [], [], [], [], [], []

    for _ in range(spec.n_trees):
        # одиночное дерево растет на всей выборке
        idx = rng.integers(0, n, size=n) if spec.n_trees > 1 else np.arange(n)
        builder = _TreeBuilder(n_classes, spec.max_depth, rng)
        builder.grow(X[idx], y[idx])
        shift = len(feature)
        offsets.append(shift)
        feature.extend(builder.feature)
        threshold.extend(builder.threshold)
        left.extend(child + shift if child != LEAF else LEAF for child in builder.left)
        right.extend(child + shift if child != LEAF else LEAF for child in builder.right)
        value.extend(builder.value)

    logger.info(f"Случайный лес обучен: {spec.n_trees} деревьев, {len(feature)} узлов")
    return RandomForestModel(spec, X.shape[1], feature, threshold, left, right, np.vstack(value), offsets)
