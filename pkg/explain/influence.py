"""
Прототипные объяснения: функции влияния обучающих точек

score_i = -grad L(z_test)^T H^{-1} grad L(z_i); положительное значение
означает, что увеличение веса z_i повышает потерю на тестовой точке.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from errors import EmptyDatasetError, InvalidValueError
from models.objectives import solve_spd
from models.specs import ModelSpec
from models.training import ConvexFit, fit_convex
from tensor_core.datasets import Dataset
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class InfluenceResult:
    per_training_point: np.ndarray
    test_point: np.ndarray
    test_label: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.per_training_point)):
            raise InvalidValueError("Оценки влияния содержат NaN или Inf")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_training_point": self.per_training_point.tolist(),
            "test_point": self.test_point.tolist(),
            "test_label": self.test_label,
        }

    def ranking(self) -> np.ndarray:
        """Индексы обучающих точек по убыванию вредного влияния"""
        return np.argsort(-self.per_training_point, kind="stable")


def _influence_scores(result: ConvexFit, g_test: np.ndarray) -> np.ndarray:
    """g_test: вектор (P,) или матрица (P, k) для k тестовых точек сразу"""
    objective, theta, X, y = result.objective, result.theta, result.X, result.y
    H = objective.hessian(theta, X, y)
    train_grads = objective.point_grads(theta, X, X, y)
    return -train_grads @ solve_spd(H, g_test)


def influence(victim: ModelSpec, train: Dataset, z_test: Tuple[ArrayLike, int]) -> InfluenceResult:
    x_test, y_test = z_test
    x_test = as_vector(x_test, train.n_features)
    result = fit_convex(victim, train)
    g_test = result.objective.point_grads(result.theta, result.X, x_test[None, :], [int(y_test)])[0]
    scores = _influence_scores(result, g_test)
    logger.info(f"Влияние {train.n_samples} обучающих точек, максимум |score| = {np.abs(scores).max():.3e}")
    return InfluenceResult(scores, x_test, int(y_test))


def average_influence(victim: ModelSpec, train: Dataset, test: Dataset) -> np.ndarray:
    """Влияние, усредненное по тестовому набору (линейно по grad L(z_test))"""
    if test.n_samples == 0:
        raise EmptyDatasetError("Пустой тестовый набор")
    result = fit_convex(victim, train)
    g_test = result.objective.val_grad(result.theta, result.X, test.dense_X(), test.y)
    return _influence_scores(result, g_test)


def influence_many(victim: ModelSpec, train: Dataset, test: Dataset) -> List[InfluenceResult]:
    """Влияние для каждой тестовой точки при одном обучении жертвы"""
    if test.n_samples == 0:
        return []
    result = fit_convex(victim, train)
    X_test = test.dense_X()
    g_test = result.objective.point_grads(result.theta, result.X, X_test, test.y)
    scores = _influence_scores(result, g_test.T)
    return [InfluenceResult(scores[:, k], X_test[k], int(test.y[k])) for k in range(test.n_samples)]
