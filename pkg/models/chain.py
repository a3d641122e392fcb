"""
Цепочка модулей: min-max масштабирование + классификатор

Градиент цепочки считается по правилу цепочки: якобиан масштабирования
диагонален, поэтому J^T v = diag(1 / (max - min)) * (градиент модели).
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sp

from errors import EmptyDatasetError, ShapeError
from models.base import Classifier, TrainedModel, frozen_array
from tensor_core.datasets import Dataset
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinMaxScaler:
    """Аффинное отображение диапазона [min_j, max_j] каждого признака в [0, 1]"""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        minimum = frozen_array(np.ravel(self.minimum))
        maximum = frozen_array(np.ravel(self.maximum))
        if minimum.shape != maximum.shape:
            raise ShapeError("minimum и maximum масштабирования разной длины")
        object.__setattr__(self, "minimum", minimum)
        object.__setattr__(self, "maximum", maximum)

    @property
    def n_features(self) -> int:
        return self.minimum.shape[0]

    @property
    def jacobian_diag(self) -> np.ndarray:
        """1 / (max - min); для постоянных признаков 0"""
        span = self.maximum - self.minimum
        scale = np.zeros_like(span)
        np.divide(1.0, span, out=scale, where=span > 0)
        return scale

    def transform(self, X: np.ndarray) -> np.ndarray:
        span = self.maximum - self.minimum
        return np.where(span > 0, (X - self.minimum) * self.jacobian_diag, 0.5)

    def to_dict(self) -> Dict[str, list]:
        return {"minimum": self.minimum.tolist(), "maximum": self.maximum.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "MinMaxScaler":
        return cls(np.asarray(data["minimum"], dtype=float), np.asarray(data["maximum"], dtype=float))


def fit_scaler(ds: Dataset) -> MinMaxScaler:
    if ds.n_samples == 0:
        raise EmptyDatasetError("Нельзя обучить масштабирование на пустом наборе")
    X = ds.X.data
    if sp.issparse(X):
        minimum = np.asarray(X.min(axis=0).todense()).ravel()
        maximum = np.asarray(X.max(axis=0).todense()).ravel()
    else:
        minimum, maximum = X.min(axis=0), X.max(axis=0)
    return MinMaxScaler(minimum, maximum)


class ModuleChain(Classifier):
    """Классификатор, применяемый к масштабированному входу"""

    def __init__(self, preprocessor: MinMaxScaler, model: TrainedModel):
        if preprocessor.n_features != model.n_features:
            raise ShapeError(
                f"Масштабирование на {preprocessor.n_features} признаков, модель ждет {model.n_features}"
            )
        self.preprocessor = preprocessor
        self.model = model
        self.n_classes = model.n_classes
        self.n_features = model.n_features

    @property
    def kind(self) -> str:
        return self.model.kind

    @property
    def differentiable(self) -> bool:
        return self.model.differentiable

    def _scores(self, X) -> np.ndarray:
        X = X.toarray() if sp.issparse(X) else X
        return self.model._scores(self.preprocessor.transform(X))

    def _vjp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        inner = self.model._vjp(self.preprocessor.transform(x), v)
        return self.preprocessor.jacobian_diag * inner

    def __repr__(self) -> str:
        return f"ModuleChain({self.model!r})"


def chain(m: TrainedModel, scaler: MinMaxScaler) -> ModuleChain:
    return ModuleChain(scaler, m)


def chain_scores_and_gradient(c: ModuleChain, x: ArrayLike, class_idx: int) -> Tuple[np.ndarray, np.ndarray]:
    vector = as_vector(x, c.n_features)
    return c.decision_scores(vector), c.input_gradient(vector, class_idx)
