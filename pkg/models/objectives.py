"""
Выпуклые обучающие задачи и метод Ньютона

ConvexObjective описывает регуляризованную обучающую потерю гладкой выпуклой
модели в терминах вектора параметров theta. Этим интерфейсом пользуются
обучение (fit), атака отравлением (неявное дифференцирование) и
функции влияния.
"""

import logging
from abc import ABC, abstractmethod
from typing import Callable, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

import config
from errors import ConvergenceError, IllConditionedError
from models.specs import ModelSpec

logger = logging.getLogger(__name__)


def solve_spd(H: np.ndarray, rhs: np.ndarray, jitter: float = config.HESSIAN_JITTER) -> np.ndarray:
    """Решение H u = rhs факторизацией Холецкого; при неудаче добавляется jitter * I"""
    try:
        factor = cho_factor(H, lower=True, check_finite=True)
    except (LinAlgError, ValueError):
        logger.warning(f"Факторизация гессиана не удалась, повтор с jitter={jitter:g}")
        try:
            factor = cho_factor(H + jitter * np.eye(H.shape[0]), lower=True, check_finite=True)
        except (LinAlgError, ValueError) as e:
            raise IllConditionedError(f"Гессиан плохо обусловлен даже с jitter={jitter:g}: {e}") from e
    return cho_solve(factor, rhs)


def newton_minimize(fun: Callable, grad: Callable, hess: Callable, theta0: np.ndarray,
                    tol: float = config.FIT_TOL, max_iter: int = config.FIT_MAX_ITER) -> np.ndarray:
    """Метод Ньютона с откатом шага по Армихо до ||grad|| <= tol"""

    theta = np.array(theta0, dtype=np.float64)
    value = fun(theta)
    g = grad(theta)
    grad_norm = float(np.linalg.norm(g))

    for iteration in range(max_iter):
        if grad_norm <= tol:
            logger.debug(f"Ньютон сошелся за {iteration} итераций, ||g||={grad_norm:.2e}")
            return theta
        step = solve_spd(hess(theta), g)
        slope = float(g @ step)
        t = 1.0
        while True:
            candidate = theta - t * step
            cand_value = fun(candidate)
            # допуск округления: у оптимума значения совпадают до машинной точности
            slack = 4 * np.finfo(float).eps * max(1.0, abs(value))
            if cand_value <= value - 1e-4 * t * slope + slack or t < 1e-12:
                break
            t *= 0.5
        theta, value = candidate, cand_value
        g = grad(theta)
        grad_norm = float(np.linalg.norm(g))

    if grad_norm <= tol:
        return theta
    raise ConvergenceError(f"Метод Ньютона не сошелся за {max_iter} итераций", grad_norm)


class ConvexObjective(ABC):
    """Регуляризованная обучающая потеря выпуклой модели"""

    def __init__(self, spec: ModelSpec, n_classes: int, n_features: int):
        self.spec = spec
        self.n_classes = int(n_classes)
        self.n_features = int(n_features)
        self.regularization = float(spec.regularization)

    @abstractmethod
    def n_params(self, n_train: int) -> int:
        ...

    @abstractmethod
    def objective(self, theta, X, y) -> float:
        ...

    @abstractmethod
    def gradient(self, theta, X, y) -> np.ndarray:
        ...

    @abstractmethod
    def hessian(self, theta, X, y) -> np.ndarray:
        ...

    @abstractmethod
    def point_losses(self, theta, X_train, Xq, yq) -> np.ndarray:
        """Нерегуляризованные потери точек Xq при параметрах theta"""

    @abstractmethod
    def point_grads(self, theta, X_train, Xq, yq) -> np.ndarray:
        """Градиенты потерь точек Xq по theta: (m, n_params)"""

    @abstractmethod
    def to_model(self, theta, X_train):
        ...

    def fit_theta(self, X, y, theta0: Optional[np.ndarray] = None,
                  tol: float = config.FIT_TOL) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if theta0 is None:
            theta0 = np.zeros(self.n_params(X.shape[0]))
        return newton_minimize(
            lambda t: self.objective(t, X, y),
            lambda t: self.gradient(t, X, y),
            lambda t: self.hessian(t, X, y),
            theta0, tol=tol,
        )

    def val_loss(self, theta, X_train, Xv, yv) -> float:
        return float(self.point_losses(theta, X_train, Xv, yv).mean())

    def val_grad(self, theta, X_train, Xv, yv) -> np.ndarray:
        return self.point_grads(theta, X_train, Xv, yv).mean(axis=0)

    @abstractmethod
    def mixed_partial(self, theta, X, y, index) -> np.ndarray:
        """Смешанная производная d/dx_index градиента J по theta: (n_params, d)"""

    def val_direct_grad(self, theta, X_train, Xv, yv, index) -> np.ndarray:
        """Явная зависимость валидационной потери от x_index при фиксированном theta"""
        return np.zeros(self.n_features)

    def extend_theta(self, theta: np.ndarray, n_old: int, n_new: int) -> np.ndarray:
        """Теплый старт после добавления обучающих точек"""
        return np.array(theta, dtype=np.float64)
