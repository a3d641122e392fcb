"""
Линейные модели: мультиномиальная логистическая регрессия и линейный SVM
(one-vs-rest, квадратичный hinge)

Оценки z = W x + b. Параметры обучения упакованы в вектор
theta = Theta.ravel(), Theta = [W | b] формы (C, d + 1).
"""

import logging
from typing import Dict

import numpy as np
import scipy.sparse as sp

from models.base import TrainedModel, frozen_array
from models.losses import logsumexp, softmax
from models.objectives import ConvexObjective
from models.specs import ModelSpec

logger = logging.getLogger(__name__)


class LinearModel(TrainedModel):
    """Линейный классификатор с оценками z = W x + b"""

    def __init__(self, spec: ModelSpec, weights, bias):
        weights = frozen_array(np.atleast_2d(weights))
        super().__init__(spec, weights.shape[0], weights.shape[1])
        self.weights = weights
        self.bias = frozen_array(bias)

    def _scores(self, X) -> np.ndarray:
        return np.asarray(X @ self.weights.T) + self.bias

    def _vjp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        # градиент линейной оценки не зависит от x
        return self.weights.T @ v

    def get_params(self) -> Dict[str, np.ndarray]:
        return {"weights": self.weights, "bias": self.bias}

    @classmethod
    def from_params(cls, spec, n_classes, n_features, params):
        return cls(spec, np.reshape(params["weights"], (n_classes, n_features)), params["bias"])


def _augment(X) -> np.ndarray:
    X = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=np.float64)
    return np.hstack([X, np.ones((X.shape[0], 1))])


class LinearObjective(ConvexObjective):
    """
    Регуляризованная средняя потеря линейной модели:
    J(theta) = mean_i l(x_i, y_i) + lambda/2 * ||theta||^2
    """

    def __init__(self, spec: ModelSpec, n_classes: int, n_features: int):
        super().__init__(spec, n_classes, n_features)
        self.logistic = spec.kind == "logreg"

    def n_params(self, n_train: int) -> int:
        return self.n_classes * (self.n_features + 1)

    def _theta_matrix(self, theta: np.ndarray) -> np.ndarray:
        return theta.reshape(self.n_classes, self.n_features + 1)

    def _residuals(self, Z: np.ndarray, y: np.ndarray):
        """Потери по образцам, dl/dz (n, C) и диагональ/матрицы d2l/dz2"""
        n = Z.shape[0]
        if self.logistic:
            P = softmax(Z)
            losses = logsumexp(Z) - Z[np.arange(n), y]
            R = P.copy()
            # r_y = -sum_{j != y} p_j устойчиво при насыщении softmax
            R[np.arange(n), y] = 0.0
            R[np.arange(n), y] = -R.sum(axis=1)
            curvature = np.einsum('ic,cd->icd', P, np.eye(self.n_classes)) - np.einsum('ic,id->icd', P, P)
            return losses, R, curvature
        T = -np.ones_like(Z)
        T[np.arange(n), y] = 1.0
        margins = np.maximum(0.0, 1.0 - T * Z)
        losses = (margins ** 2).sum(axis=1)
        R = -2.0 * T * margins
        active = (margins > 0).astype(np.float64)
        curvature = np.einsum('ic,cd->icd', 2.0 * active, np.eye(self.n_classes))
        return losses, R, curvature

    def scores(self, theta, X_train, Xq) -> np.ndarray:
        return _augment(Xq) @ self._theta_matrix(theta).T

    def objective(self, theta, X, y) -> float:
        losses, _, _ = self._residuals(self.scores(theta, X, X), y)
        return float(losses.mean() + 0.5 * self.regularization * theta @ theta)

    def gradient(self, theta, X, y) -> np.ndarray:
        Xa = _augment(X)
        _, R, _ = self._residuals(Xa @ self._theta_matrix(theta).T, y)
        return (R.T @ Xa).ravel() / Xa.shape[0] + self.regularization * theta

    def hessian(self, theta, X, y) -> np.ndarray:
        Xa = _augment(X)
        n, width = Xa.shape
        _, _, curvature = self._residuals(Xa @ self._theta_matrix(theta).T, y)
        C = self.n_classes
        H = np.zeros((C * width, C * width))
        for c in range(C):
            for c2 in range(c, C):
                block = (Xa * curvature[:, c, c2][:, None]).T @ Xa / n
                H[c * width:(c + 1) * width, c2 * width:(c2 + 1) * width] = block
                if c2 != c:
                    H[c2 * width:(c2 + 1) * width, c * width:(c + 1) * width] = block.T
        H[np.diag_indices_from(H)] += self.regularization
        return H

    def point_losses(self, theta, X_train, Xq, yq) -> np.ndarray:
        losses, _, _ = self._residuals(self.scores(theta, X_train, Xq), np.asarray(yq))
        return losses

    def point_grads(self, theta, X_train, Xq, yq) -> np.ndarray:
        Xa = _augment(Xq)
        _, R, _ = self._residuals(Xa @ self._theta_matrix(theta).T, np.asarray(yq))
        return np.einsum('ic,ia->ica', R, Xa).reshape(Xa.shape[0], -1)

    def mixed_partial(self, theta, X, y, index) -> np.ndarray:
        """d/dx_index градиента J по theta: матрица (n_params, d)"""
        X = _augment(X)
        n = X.shape[0]
        x_aug = X[index]
        Theta = self._theta_matrix(theta)
        _, R, curvature = self._residuals((x_aug @ Theta.T)[None, :], np.asarray([y[index]]))
        r, S = R[0], curvature[0]
        dR_dx = S @ Theta[:, :self.n_features]          # (C, d)
        M = np.einsum('cj,a->caj', dR_dx, x_aug)          # (C, d+1, d)
        M[:, :self.n_features, :] += np.einsum('c,aj->caj', r, np.eye(self.n_features))
        return M.reshape(-1, self.n_features) / n

    def to_model(self, theta, X_train) -> LinearModel:
        Theta = self._theta_matrix(theta)
        return LinearModel(self.spec, Theta[:, :self.n_features], Theta[:, self.n_features])
