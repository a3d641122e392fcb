"""
Допустимые множества и евклидовы проекции на них

Варианты: l2-шар, linf-шар, бокс, маскированное ограничение и пересечение
шара с боксом. Все проекции точные.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

import numpy as np

import config
from errors import InvalidArgumentError, InvalidValueError, ShapeError
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)

Bound = Union[float, np.ndarray]


def _as_bound(value, name: str) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    if array.ndim > 1:
        raise ShapeError(f"{name}: ожидается скаляр или вектор")
    if np.any(np.isnan(array)):
        raise InvalidValueError(f"{name} содержит NaN")
    array.flags.writeable = False
    return array


class Constraint(ABC):
    """Допустимое множество с проекцией"""

    #: размерность множества (None: любая)
    n_features: Optional[int] = None

    def _check(self, x: ArrayLike) -> np.ndarray:
        vector = as_vector(x)
        if self.n_features is not None and vector.shape[0] != self.n_features:
            raise ShapeError(f"Ограничение размерности {self.n_features}, точка размерности {vector.shape[0]}")
        return vector

    def project(self, x: ArrayLike) -> np.ndarray:
        return self._project(self._check(x))

    def contains(self, x: ArrayLike, tol: float = config.FEASIBILITY_TOL) -> bool:
        return self._contains(self._check(x), tol)

    @abstractmethod
    def _project(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _contains(self, x: np.ndarray, tol: float) -> bool:
        ...

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        ...


@dataclass(frozen=True, eq=False)
class _Ball(Constraint):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = as_vector(self.center)
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        radius = float(self.radius)
        if not np.isfinite(radius) or radius < 0:
            raise InvalidArgumentError(f"Радиус шара должен быть конечным и неотрицательным, получено {radius}")
        object.__setattr__(self, "radius", radius)

    @property
    def n_features(self) -> int:
        return self.center.shape[0]


class L2Ball(_Ball):
    """{z : ||z - center||_2 <= radius}"""

    def _project(self, x):
        offset = x - self.center
        length = float(np.linalg.norm(offset))
        if length <= self.radius:
            return x.copy()
        return self.center + (self.radius / length) * offset

    def _contains(self, x, tol):
        return float(np.linalg.norm(x - self.center)) <= self.radius + tol

    def to_dict(self):
        return {"kind": "l2-ball", "center": self.center.tolist(), "radius": self.radius}


class LinfBall(_Ball):
    """{z : max_j |z_j - center_j| <= radius}"""

    def _project(self, x):
        return np.clip(x, self.center - self.radius, self.center + self.radius)

    def _contains(self, x, tol):
        return bool(np.all(np.abs(x - self.center) <= self.radius + tol))

    def to_dict(self):
        return {"kind": "linf-ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Box(Constraint):
    """Покоординатные границы lo <= z <= hi (скаляры или векторы)"""

    lo: Bound
    hi: Bound

    def __post_init__(self):
        lo, hi = _as_bound(self.lo, "lo"), _as_bound(self.hi, "hi")
        if lo.ndim == 1 and hi.ndim == 1 and lo.shape != hi.shape:
            raise ShapeError("lo и hi бокса разной длины")
        if np.any(lo > hi):
            raise InvalidArgumentError("Бокс: нижняя граница больше верхней")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n_features(self) -> Optional[int]:
        for bound in (self.lo, self.hi):
            if bound.ndim == 1:
                return bound.shape[0]
        return None

    def _project(self, x):
        return np.clip(x, self.lo, self.hi)

    def _contains(self, x, tol):
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def to_dict(self):
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


@dataclass(frozen=True, eq=False)
class Masked(Constraint):
    """
    Меняться могут только координаты с mask=True; остальные всегда равны
    reference. Внутреннее ограничение применяется к маскированному подвектору.
    """

    inner: Constraint
    mask: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool).ravel()
        reference = as_vector(self.reference)
        if mask.shape != reference.shape:
            raise ShapeError("Маска и опорная точка разной длины")
        if self.inner.n_features is not None and self.inner.n_features != mask.shape[0]:
            raise ShapeError("Размерность внутреннего ограничения не совпадает с маской")
        mask.flags.writeable = False
        reference.flags.writeable = False
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "reference", reference)

    @property
    def n_features(self) -> int:
        return self.mask.shape[0]

    def _project(self, x):
        z = np.where(self.mask, x, self.reference)
        z = self.inner.project(z)
        return np.where(self.mask, z, self.reference)

    def _contains(self, x, tol):
        if np.any(x[~self.mask] != self.reference[~self.mask]):
            return False
        return self.inner.contains(np.where(self.mask, x, self.reference), tol)

    def to_dict(self):
        return {
            "kind": "masked", "inner": self.inner.to_dict(),
            "mask": self.mask.tolist(), "reference": self.reference.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Intersection(Constraint):
    """Пересечение шара (l2 или linf) с боксом"""

    ball: _Ball
    box: Box

    def __post_init__(self):
        if self.box.n_features is not None and self.box.n_features != self.ball.n_features:
            raise ShapeError("Размерности шара и бокса не совпадают")
        closest = self.box.project(self.ball.center)
        if not self.ball.contains(closest, tol=0.0):
            raise InvalidArgumentError("Пересечение шара и бокса пусто")

    @property
    def n_features(self) -> int:
        return self.ball.n_features

    def _project(self, x):
        if isinstance(self.ball, LinfBall):
            lo = np.maximum(self.ball.center - self.ball.radius, self.box.lo)
            hi = np.minimum(self.ball.center + self.ball.radius, self.box.hi)
            return np.clip(x, lo, hi)
        return self._project_l2(x)

    def _project_l2(self, x):
        # z(mu) = clip((x + mu c) / (1 + mu)); ищем наименьшее mu >= 0 с ||z(mu) - c|| <= r
        c, r = self.ball.center, self.ball.radius

        def point(mu: float) -> np.ndarray:
            return self.box.project((x + mu * c) / (1.0 + mu))

        def feasible(z: np.ndarray) -> bool:
            return float(np.linalg.norm(z - c)) <= r

        z = point(0.0)
        if feasible(z):
            return z
        lo_mu, hi_mu = 0.0, 1.0
        while not feasible(point(hi_mu)):
            lo_mu, hi_mu = hi_mu, 2.0 * hi_mu
            if hi_mu > 1e300:
                return self.box.project(c)
        for _ in range(config.PROJECTION_BISECT_ITERS):
            mid = 0.5 * (lo_mu + hi_mu)
            if feasible(point(mid)):
                hi_mu = mid
            else:
                lo_mu = mid
        return point(hi_mu)

    def _contains(self, x, tol):
        return self.ball.contains(x, tol) and self.box.contains(x, tol)

    def to_dict(self):
        return {"kind": "intersection", "ball": self.ball.to_dict(), "box": self.box.to_dict()}


def ball(norm: str, center: ArrayLike, radius: float) -> _Ball:
    if norm == "l2":
        return L2Ball(center, radius)
    if norm == "linf":
        return LinfBall(center, radius)
    raise InvalidArgumentError(f"Неподдерживаемая норма шара: {norm!r}")
