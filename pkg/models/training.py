"""
Обучение моделей по ModelSpec
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

import config
from errors import DegenerateDataError, EmptyDatasetError, InvalidSpecError
from models.base import TrainedModel
from models.forest import train_forest
from models.kernel import KernelObjective
from models.linear import LinearObjective
from models.mlp import train_mlp
from models.objectives import ConvexObjective
from models.specs import ModelSpec
from tensor_core.datasets import Dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConvexFit:
    """Результат обучения выпуклой модели вместе с задачей и оптимумом theta"""

    objective: ConvexObjective
    theta: np.ndarray
    X: np.ndarray
    y: np.ndarray
    model: TrainedModel

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.objective.gradient(self.theta, self.X, self.y)))


def make_objective(spec: ModelSpec, n_classes: int, n_features: int) -> ConvexObjective:
    if spec.kind in ("logreg", "svm-linear"):
        return LinearObjective(spec, n_classes, n_features)
    if spec.kind == "svm-rbf":
        return KernelObjective(spec, n_classes, n_features)
    raise InvalidSpecError(f"модель вида '{spec.kind}' не является выпуклой")


def _check_trainable(ds: Dataset):
    if ds.n_samples == 0:
        raise EmptyDatasetError("Пустой обучающий набор")
    present = np.unique(ds.y)
    if ds.n_classes < 2 or present.size < 2:
        raise DegenerateDataError(
            f"Для обучения нужно не менее 2 классов, в данных представлено {present.size}"
        )


def fit_convex(spec: ModelSpec, ds: Dataset, theta0: Optional[np.ndarray] = None,
               tol: float = config.FIT_TOL) -> ConvexFit:
    """Обучение выпуклой модели методом Ньютона до ||grad J|| <= tol"""

    _check_trainable(ds)
    objective = make_objective(spec, ds.n_classes, ds.n_features)
    X = ds.dense_X()
    theta = objective.fit_theta(X, ds.y, theta0=theta0, tol=tol)
    return ConvexFit(objective, theta, X, ds.y, objective.to_model(theta, X))


def fit(spec: ModelSpec, ds: Dataset) -> TrainedModel:
    """Обучение классификатора: выпуклые модели обучаются методом Ньютона, MLP градиентным спуском, лес по CART"""

    _check_trainable(ds)
    logger.info(f"Обучение модели '{spec.kind}' на {ds.n_samples} образцах, {ds.n_classes} классов")

    if spec.convex:
        result = fit_convex(spec, ds)
        logger.info(f"Модель '{spec.kind}' обучена, ||grad||={result.grad_norm:.2e}")
        return result.model
    if spec.kind == "mlp":
        return train_mlp(spec, ds.dense_X(), ds.y, ds.n_classes)
    return train_forest(spec, ds.dense_X(), ds.y, ds.n_classes)
