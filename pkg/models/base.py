"""
Базовые интерфейсы классификаторов

Classifier: общий протокол для обученных моделей и цепочек модулей:
оценки классов, предсказание и аналитические градиенты по входу.
"""

import logging
from abc import ABC, abstractmethod
from typing import Dict

import numpy as np

from errors import NotDifferentiableError, ShapeError
from models.specs import ModelSpec
from tensor_core.tensor import ArrayLike, as_matrix, as_vector

logger = logging.getLogger(__name__)


def frozen_array(values, dtype=np.float64) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


class Classifier(ABC):
    """Классификатор с оценками решений и (опционально) градиентами по входу"""

    n_classes: int
    n_features: int

    @property
    @abstractmethod
    def differentiable(self) -> bool:
        ...

    @property
    @abstractmethod
    def kind(self) -> str:
        ...

    @abstractmethod
    def _scores(self, X) -> np.ndarray:
        """Оценки (n, n_classes) для матрицы X (плотной или CSR)"""

    def _vjp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """J(x)^T v, где J обозначает якобиан оценок по входу"""
        raise NotDifferentiableError(f"модель '{self.kind}' не дифференцируема")

    def decision_scores(self, x: ArrayLike) -> np.ndarray:
        vector = as_vector(x, self.n_features)
        return self._scores(vector[None, :])[0]

    def decision_scores_batch(self, X: ArrayLike) -> np.ndarray:
        matrix = as_matrix(X)
        if matrix.shape[1] != self.n_features:
            raise ShapeError(f"Ожидается {self.n_features} признаков, получено {matrix.shape[1]}")
        return self._scores(matrix)

    def predict(self, x: ArrayLike) -> int:
        # argmax возвращает первый максимум: ничьи решаются в пользу меньшего индекса
        return int(np.argmax(self.decision_scores(x)))

    def predict_batch(self, X: ArrayLike) -> np.ndarray:
        return np.argmax(self.decision_scores_batch(X), axis=1)

    def input_vjp(self, x: ArrayLike, v: ArrayLike) -> np.ndarray:
        if not self.differentiable:
            raise NotDifferentiableError(f"модель '{self.kind}' не дифференцируема: градиенты недоступны")
        vector = as_vector(x, self.n_features)
        weights = as_vector(v, self.n_classes)
        return self._vjp(vector, weights)

    def input_gradient(self, x: ArrayLike, class_idx: int) -> np.ndarray:
        """Аналитический градиент decision_scores[class_idx] по x"""
        if not 0 <= class_idx < self.n_classes:
            raise ShapeError(f"Класс {class_idx} вне диапазона [0, {self.n_classes})")
        unit = np.zeros(self.n_classes)
        unit[class_idx] = 1.0
        return self.input_vjp(x, unit)

    def input_jacobian(self, x: ArrayLike) -> np.ndarray:
        return np.vstack([self.input_gradient(x, c) for c in range(self.n_classes)])


class TrainedModel(Classifier):
    """Обученная модель: спецификация и неизменяемые параметры"""

    def __init__(self, spec: ModelSpec, n_classes: int, n_features: int):
        self.spec = spec
        self.n_classes = int(n_classes)
        self.n_features = int(n_features)

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def differentiable(self) -> bool:
        return self.spec.differentiable

    @abstractmethod
    def get_params(self) -> Dict[str, np.ndarray]:
        ...

    @classmethod
    @abstractmethod
    def from_params(cls, spec: ModelSpec, n_classes: int, n_features: int,
                    params: Dict[str, np.ndarray]) -> "TrainedModel":
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}(kind={self.kind}, n_classes={self.n_classes}, n_features={self.n_features})"
