"""
Функции потерь атак над оценками классификатора

cross-entropy: softmax-кросс-энтропия оценок в метке y;
cw-logit-diff: L = max(max_{i != t} z_i - z_t, -kappa) для целевого класса t.
"""

import logging
from typing import Tuple

import numpy as np

from errors import InvalidSpecError
from models.base import Classifier
from models.specs import LossSpec
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)


def softmax(Z: np.ndarray) -> np.ndarray:
    shifted = Z - Z.max(axis=-1, keepdims=True)
    expo = np.exp(shifted)
    return expo / expo.sum(axis=-1, keepdims=True)


def logsumexp(Z: np.ndarray) -> np.ndarray:
    top = Z.max(axis=-1)
    return top + np.log(np.exp(Z - np.expand_dims(top, -1)).sum(axis=-1))


def cross_entropy_residual(z: np.ndarray, y: int) -> Tuple[float, np.ndarray]:
    """Потеря CE и dL/dz = p - e_y (компонента y считается как -sum_{j != y} p_j)"""
    value = float(logsumexp(z) - z[y])
    residual = softmax(z)
    residual[y] = 0.0
    residual[y] = -residual.sum()
    return value, residual


def cw_residual(z: np.ndarray, target: int, kappa: float) -> Tuple[float, np.ndarray]:
    others = z.copy()
    others[target] = -np.inf
    rival = int(np.argmax(others))
    diff = float(z[rival] - z[target])
    residual = np.zeros_like(z)
    if diff < -kappa:
        # ниже порога потеря постоянна
        return -kappa, residual
    residual[rival] = 1.0
    residual[target] = -1.0
    return diff, residual


def _check_label(label: int, n_classes: int, what: str):
    if not 0 <= int(label) < n_classes:
        raise InvalidSpecError(f"{what} {label} вне диапазона [0, {n_classes})")


def _value_and_residual(m: Classifier, x: np.ndarray, y: int, spec: LossSpec):
    z = m.decision_scores(x)
    if spec.kind == "cross-entropy":
        _check_label(y, m.n_classes, "метка")
        return cross_entropy_residual(z, int(y))
    if spec.target_label is None:
        raise InvalidSpecError("потеря cw-logit-diff требует target_label")
    _check_label(spec.target_label, m.n_classes, "target_label")
    return cw_residual(z, spec.target_label, spec.kappa)


def loss_value(m: Classifier, x: ArrayLike, y: int, spec: LossSpec) -> float:
    """Значение потери без градиента (годится и для недифференцируемых моделей)"""
    value, _ = _value_and_residual(m, as_vector(x, m.n_features), y, spec)
    return value


def loss_value_and_gradient(m: Classifier, x: ArrayLike, y: int, spec: LossSpec) -> Tuple[float, np.ndarray]:
    """Значение потери и ее градиент по входу (субградиент для CW)"""
    vector = as_vector(x, m.n_features)
    value, residual = _value_and_residual(m, vector, y, spec)
    return value, m.input_vjp(vector, residual)
