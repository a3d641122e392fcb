"""
Многослойный перцептрон: 1-2 скрытых слоя tanh и softmax-голова

Обучение: полный градиентный спуск по средней кросс-энтропии с
l2-регуляризацией весов; инициализация детерминирована по seed.
"""

import logging
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp

from errors import ConvergenceError
from models.base import TrainedModel, frozen_array
from models.losses import logsumexp, softmax
from models.specs import ModelSpec

logger = logging.getLogger(__name__)

Layer = Tuple[np.ndarray, np.ndarray]


def _forward(layers: List[Layer], X: np.ndarray):
    """Активации скрытых слоев и логиты"""
    activations = [X]
    for W, b in layers[:-1]:
        activations.append(np.tanh(activations[-1] @ W.T + b))
    W_out, b_out = layers[-1]
    return activations, activations[-1] @ W_out.T + b_out


def _backward(layers: List[Layer], activations: List[np.ndarray], delta: np.ndarray):
    """Градиенты по параметрам слоев и по входу для dL/dz = delta (n, C)"""
    grads = []
    for depth in range(len(layers) - 1, -1, -1):
        W, _ = layers[depth]
        inputs = activations[depth]
        grads.append((delta.T @ inputs, delta.sum(axis=0)))
        delta = delta @ W
        if depth > 0:
            delta = delta * (1.0 - inputs ** 2)
    grads.reverse()
    return grads, delta


def init_layers(spec: ModelSpec, n_features: int, n_classes: int) -> List[Layer]:
    rng = np.random.default_rng(spec.seed)
    sizes = [n_features, *spec.hidden_sizes, n_classes]
    return [
        (rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_out, fan_in)), np.zeros(fan_out))
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:])
    ]


class MLPModel(TrainedModel):
    """Перцептрон с tanh-активациями; оценки равны логитам до softmax"""

    def __init__(self, spec: ModelSpec, layers: List[Layer]):
        super().__init__(spec, layers[-1][0].shape[0], layers[0][0].shape[1])
        self.layers = [(frozen_array(W), frozen_array(b)) for W, b in layers]

    def _scores(self, X) -> np.ndarray:
        X = X.toarray() if sp.issparse(X) else X
        _, logits = _forward(self.layers, X)
        return logits

    def _vjp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        activations, _ = _forward(self.layers, x[None, :])
        _, grad_x = _backward(self.layers, activations, v[None, :])
        return grad_x[0]

    def get_params(self) -> Dict[str, np.ndarray]:
        params = {}
        for i, (W, b) in enumerate(self.layers):
            params[f"W{i}"] = W
            params[f"b{i}"] = b
        return params

    @classmethod
    def from_params(cls, spec, n_classes, n_features, params):
        sizes = [n_features, *spec.hidden_sizes, n_classes]
        layers = [
            (np.reshape(params[f"W{i}"], (fan_out, fan_in)), np.reshape(params[f"b{i}"], (fan_out,)))
            for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]))
        ]
        return cls(spec, layers)


def train_mlp(spec: ModelSpec, X: np.ndarray, y: np.ndarray, n_classes: int) -> MLPModel:
    """Полный градиентный спуск фиксированное число эпох"""

    n, d = X.shape
    layers = init_layers(spec, d, n_classes)
    lam = spec.regularization
    eta = spec.learning_rate
    onehot = np.eye(n_classes)[y]

    loss = np.nan
    for epoch in range(spec.epochs):
        activations, logits = _forward(layers, X)
        loss = float(np.mean(logsumexp(logits) - logits[np.arange(n), y]))
        loss += 0.5 * lam * sum(float(np.sum(W * W)) for W, _ in layers)
        if not np.isfinite(loss):
            raise ConvergenceError(f"Потеря MLP стала нечисловой на эпохе {epoch}", np.nan)
        grads, _ = _backward(layers, activations, (softmax(logits) - onehot) / n)
        layers = [
            (W - eta * (gW + lam * W), b - eta * gb)
            for (W, b), (gW, gb) in zip(layers, grads)
        ]
        if epoch % 500 == 0:
            logger.debug(f"MLP эпоха {epoch}: потеря {loss:.6f}")

    logger.info(f"MLP обучен: {spec.epochs} эпох, итоговая потеря {loss:.6f}")
    return MLPModel(spec, layers)
