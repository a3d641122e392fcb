"""
SVM с RBF-ядром в форме представителя (one-vs-rest, квадратичный hinge)

z_c(x) = sum_i alpha_ci k(x, x_i) + b_c,  k(x, x') = exp(-gamma ||x - x'||^2)
theta = [alpha_0, ..., alpha_{C-1}, b], alpha_c: вектор длины n_train.
"""

import logging
from typing import Dict

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

import config
from models.base import TrainedModel, frozen_array
from models.objectives import ConvexObjective
from models.specs import ModelSpec

logger = logging.getLogger(__name__)


def rbf_kernel(X1: np.ndarray, X2: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(np.atleast_2d(X1), np.atleast_2d(X2), 'sqeuclidean'))


class KernelSVM(TrainedModel):
    """Ядерный SVM: опорные точки, двойственные коэффициенты (C, n) и смещения"""

    def __init__(self, spec: ModelSpec, support, dual_coef, bias):
        support = frozen_array(np.atleast_2d(support))
        dual_coef = frozen_array(np.atleast_2d(dual_coef))
        super().__init__(spec, dual_coef.shape[0], support.shape[1])
        self.support = support
        self.dual_coef = dual_coef
        self.bias = frozen_array(bias)
        self.gamma = float(spec.gamma)

    def _scores(self, X) -> np.ndarray:
        X = X.toarray() if sp.issparse(X) else X
        return rbf_kernel(X, self.support, self.gamma) @ self.dual_coef.T + self.bias

    def _vjp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        # dk(x, x_i)/dx = -2 gamma (x - x_i) k(x, x_i)
        k = rbf_kernel(x, self.support, self.gamma)[0]
        weights = (self.dual_coef.T @ v) * k
        return -2.0 * self.gamma * (weights.sum() * x - weights @ self.support)

    def get_params(self) -> Dict[str, np.ndarray]:
        return {"support": self.support, "dual_coef": self.dual_coef, "bias": self.bias}

    @classmethod
    def from_params(cls, spec, n_classes, n_features, params):
        support = np.reshape(params["support"], (-1, n_features))
        dual_coef = np.reshape(params["dual_coef"], (n_classes, support.shape[0]))
        return cls(spec, support, dual_coef, params["bias"])


class KernelObjective(ConvexObjective):
    """
    J(theta) = mean_i sum_c max(0, 1 - t_ic z_ic)^2
               + lambda/2 * (sum_c alpha_c^T (K + jitter I) alpha_c + ||b||^2)
    """

    def __init__(self, spec: ModelSpec, n_classes: int, n_features: int):
        super().__init__(spec, n_classes, n_features)
        self.gamma = float(spec.gamma)

    def n_params(self, n_train: int) -> int:
        return self.n_classes * (n_train + 1)

    def _unpack(self, theta: np.ndarray, n: int):
        C = self.n_classes
        return theta[:C * n].reshape(C, n), theta[C * n:]

    def _margins(self, Z: np.ndarray, y: np.ndarray):
        m = Z.shape[0]
        T = -np.ones_like(Z)
        T[np.arange(m), y] = 1.0
        margins = np.maximum(0.0, 1.0 - T * Z)
        return T, margins

    def scores(self, theta, X_train, Xq) -> np.ndarray:
        A, b = self._unpack(theta, X_train.shape[0])
        return rbf_kernel(Xq, X_train, self.gamma) @ A.T + b

    def objective(self, theta, X, y) -> float:
        n = X.shape[0]
        A, b = self._unpack(theta, n)
        K = rbf_kernel(X, X, self.gamma)
        _, margins = self._margins(K @ A.T + b, y)
        reg = np.einsum('ci,ij,cj->', A, K, A) + config.KERNEL_JITTER * np.sum(A * A) + b @ b
        return float((margins ** 2).sum() / n + 0.5 * self.regularization * reg)

    def gradient(self, theta, X, y) -> np.ndarray:
        n = X.shape[0]
        A, b = self._unpack(theta, n)
        K = rbf_kernel(X, X, self.gamma)
        T, margins = self._margins(K @ A.T + b, y)
        R = -2.0 * T * margins
        lam = self.regularization
        grad_A = (K @ R).T / n + lam * (A @ K + config.KERNEL_JITTER * A)
        grad_b = R.sum(axis=0) / n + lam * b
        return np.concatenate([grad_A.ravel(), grad_b])

    def hessian(self, theta, X, y) -> np.ndarray:
        n = X.shape[0]
        C = self.n_classes
        A, b = self._unpack(theta, n)
        K = rbf_kernel(X, X, self.gamma)
        _, margins = self._margins(K @ A.T + b, y)
        lam = self.regularization
        H = np.zeros((C * (n + 1), C * (n + 1)))
        for c in range(C):
            d = 2.0 * (margins[:, c] > 0)
            rows = slice(c * n, (c + 1) * n)
            H[rows, rows] = (K * d) @ K / n + lam * (K + config.KERNEL_JITTER * np.eye(n))
            coupling = K @ d / n
            H[rows, C * n + c] = coupling
            H[C * n + c, rows] = coupling
            H[C * n + c, C * n + c] = d.sum() / n + lam
        return H

    def point_losses(self, theta, X_train, Xq, yq) -> np.ndarray:
        _, margins = self._margins(self.scores(theta, X_train, Xq), np.asarray(yq))
        return (margins ** 2).sum(axis=1)

    def point_grads(self, theta, X_train, Xq, yq) -> np.ndarray:
        kq = rbf_kernel(Xq, X_train, self.gamma)
        A, b = self._unpack(theta, X_train.shape[0])
        T, margins = self._margins(kq @ A.T + b, np.asarray(yq))
        R = -2.0 * T * margins
        grad_A = np.einsum('mc,mi->mci', R, kq).reshape(kq.shape[0], -1)
        return np.hstack([grad_A, R])

    def mixed_partial(self, theta, X, y, index) -> np.ndarray:
        """
        d/dx_index градиента J по theta: матрица (n_params, d)

        x_index входит в строку и столбец K: через оценки всех обучающих
        точек, через собственную оценку z_index и через регуляризатор alpha^T K alpha.
        """
        X = np.asarray(X, dtype=np.float64)
        n, C, p = X.shape[0], self.n_classes, index
        A, b = self._unpack(theta, n)
        K = rbf_kernel(X, X, self.gamma)
        T, margins = self._margins(K @ A.T + b, np.asarray(y))
        R = -2.0 * T * margins
        D = 2.0 * (margins > 0)
        lam = self.regularization

        # E_j = dk(x_index, x_j)/dx_index, строка index нулевая
        E = -2.0 * self.gamma * (X[p] - X) * K[p][:, None]
        M = np.zeros((C * (n + 1), X.shape[1]))
        for c in range(C):
            F = E.T @ A[c]
            DE = D[:, c][:, None] * E
            block = (R[p, c] * E + A[c, p] * (K @ DE) + D[p, c] * np.outer(K[p], F)) / n
            block += lam * A[c, p] * E
            block[p] += (R[:, c] @ E) / n + lam * F
            M[c * n:(c + 1) * n] = block
            M[C * n + c] = (A[c, p] * DE.sum(axis=0) + D[p, c] * F) / n
        return M

    def val_direct_grad(self, theta, X_train, Xv, yv, index) -> np.ndarray:
        # z_vc зависит от x_index через k(x_v, x_index)
        A, b = self._unpack(theta, X_train.shape[0])
        kv = rbf_kernel(Xv, X_train, self.gamma)
        T, margins = self._margins(kv @ A.T + b, np.asarray(yv))
        R = -2.0 * T * margins
        weights = (R @ A[:, index]) * kv[:, index]
        diffs = Xv - X_train[index]
        return 2.0 * self.gamma * (weights @ diffs) / Xv.shape[0]

    def to_model(self, theta, X_train) -> KernelSVM:
        A, b = self._unpack(theta, X_train.shape[0])
        return KernelSVM(self.spec, X_train, A, b)

    def extend_theta(self, theta, n_old, n_new) -> np.ndarray:
        # новые точки получают нулевые коэффициенты alpha
        A, b = self._unpack(np.asarray(theta), n_old)
        padded = np.hstack([A, np.zeros((self.n_classes, n_new - n_old))])
        return np.concatenate([padded.ravel(), b])
