"""
Признаковые объяснения: интегрированные градиенты и локальный линейный суррогат
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import numpy as np

import config
from errors import InvalidArgumentError, InvalidValueError, KernelWidthError, ShapeError
from models.base import Classifier
from models.chain import ModuleChain
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)

Method = Literal["integrated-gradients", "linear-surrogate"]


@dataclass(frozen=True, eq=False)
class Attribution:
    """Знаковые оценки вклада признаков в оценку target_class"""

    per_feature: np.ndarray
    baseline: np.ndarray
    target_class: int
    method: Method

    def __post_init__(self):
        if not np.all(np.isfinite(self.per_feature)):
            raise InvalidValueError("Атрибуции содержат NaN или Inf")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "per_feature": self.per_feature.tolist(),
            "baseline": self.baseline.tolist(),
            "target_class": self.target_class,
            "method": self.method,
        }

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(("feature_index", "score"))
            for index, score in enumerate(self.per_feature):
                writer.writerow((index, repr(float(score))))
        return path


def _target(m: Classifier, x: np.ndarray, target: Optional[int]) -> int:
    if target is None:
        return m.predict(x)
    if not 0 <= int(target) < m.n_classes:
        raise ShapeError(f"Класс {target} вне диапазона [0, {m.n_classes})")
    return int(target)


def integrated_gradients(m: Classifier, x: ArrayLike, baseline: Optional[ArrayLike] = None,
                         target: Optional[int] = None, m_steps: int = config.IG_STEPS) -> Attribution:
    """
    IG_i = (x_i - b_i) * среднее по k градиента оценки target в точках
    b + ((k - 0.5) / m_steps) * (x - b), k = 1..m_steps (правило средних точек).
    Базовая точка по умолчанию: нулевой вектор в масштабированном пространстве
    (для ModuleChain это минимумы признаков масштабирования).
    """
    if m_steps < 1:
        raise InvalidArgumentError("m_steps должно быть положительным")
    x = as_vector(x, m.n_features)
    if baseline is not None:
        b = as_vector(baseline, m.n_features)
    elif isinstance(m, ModuleChain):
        b = np.array(m.preprocessor.minimum)
    else:
        b = np.zeros_like(x)
    target = _target(m, x, target)

    delta = x - b
    total = np.zeros_like(x)
    for alpha in (np.arange(1, m_steps + 1) - 0.5) / m_steps:
        total += m.input_gradient(b + alpha * delta, target)
    return Attribution(delta * total / m_steps, b, target, "integrated-gradients")


def linear_surrogate(m: Classifier, x: ArrayLike, n_samples: int, kernel_width: float, seed: int,
                     target: Optional[int] = None, feature_range: Optional[ArrayLike] = None) -> Attribution:
    """
    Взвешенная гребневая регрессия оценки target на локальной выборке
    z ~ x + SURROGATE_SCALE * range * N(0, I) с весами exp(-||z - x||^2 / width^2).
    Градиенты модели не нужны.
    """
    if n_samples < 1:
        raise InvalidArgumentError("n_samples должно быть положительным")
    if not kernel_width > 0:
        raise InvalidArgumentError("kernel_width должна быть положительной")
    x = as_vector(x, m.n_features)
    spread = np.ones_like(x) if feature_range is None else as_vector(feature_range, m.n_features)
    target = _target(m, x, target)

    rng = np.random.default_rng(seed)
    Z = x + config.SURROGATE_SCALE * spread * rng.standard_normal((n_samples, x.shape[0]))
    weights = np.exp(-np.sum((Z - x) ** 2, axis=1) / kernel_width ** 2)
    if np.all(weights < config.SURROGATE_MIN_WEIGHT):
        raise KernelWidthError(f"Все веса выборки < {config.SURROGATE_MIN_WEIGHT:g}: увеличьте kernel_width")

    scores = m.decision_scores_batch(Z)[:, target]
    design = np.hstack([Z - x, np.ones((n_samples, 1))])
    penalty = config.SURROGATE_RIDGE * np.eye(design.shape[1])
    penalty[-1, -1] = 0.0   # свободный член не штрафуется
    gram = design.T @ (design * weights[:, None]) + penalty
    coef = np.linalg.solve(gram, design.T @ (weights * scores))
    logger.debug(f"Суррогат: {n_samples} образцов, сумма весов {weights.sum():.3g}")
    return Attribution(coef[:-1], x, target, "linear-surrogate")
