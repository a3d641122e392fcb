"""
Атака отравлением обучающей выборки

Точки отравления оптимизируются последовательно (жадно): каждая максимизирует
валидационную потерю модели, переобученной на train + {x_c}. Градиент по x_c
считается неявным дифференцированием условия оптимальности обучения:

    g = -(d^2 J / dx_c dtheta)^T H^{-1} grad_theta L_val + (явный член по x_c)

Стартовые точки берутся из копий обучающих точек с перевернутой меткой,
ранжированных по точности переобученной модели на валидации. Из одной копии
солвер часто сходится к углу допустимого ящика, где растет только
неуверенность модели, поэтому итог шага выбирается среди нескольких стартов.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

import config
from attacks.specs import PoisoningSpec
from errors import InvalidSpecError
from models.objectives import solve_spd
from models.specs import ModelSpec
from models.training import ConvexFit, fit_convex
from optim.constraints import Box
from optim.problem import Problem, SolverTrace
from optim.solvers import solve
from tensor_core.datasets import Dataset, bounding_box, make_dataset
from tensor_core.metrics import accuracy
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)


def _implicit_gradient(result: ConvexFit, val: Dataset, index: int) -> np.ndarray:
    objective, theta, X, y = result.objective, result.theta, result.X, result.y
    Xv, yv = val.dense_X(), val.y
    H = objective.hessian(theta, X, y)
    u = solve_spd(H, objective.val_grad(theta, X, Xv, yv))
    M = objective.mixed_partial(theta, X, y, index)
    return -M.T @ u + objective.val_direct_grad(theta, X, Xv, yv, index)


def poison_gradient(victim: ModelSpec, train: Dataset, val: Dataset, xc: ArrayLike, yc: int,
                    theta0: Optional[np.ndarray] = None) -> np.ndarray:
    """Градиент валидационной потери по точке отравления x_c"""
    xc = as_vector(xc, train.n_features)
    augmented = train.with_points(xc[None, :], [int(yc)])
    result = fit_convex(victim, augmented, theta0=theta0, tol=config.POISON_FIT_TOL)
    return _implicit_gradient(result, val, augmented.n_samples - 1)


class _PoisonObjective:
    """
    Целевая функция внешней задачи: -L_val(theta*(x_c)). Оптимум theta*
    кэшируется по x_c, чтобы значение и градиент в одной точке не требовали
    двух переобучений.
    """

    def __init__(self, victim: ModelSpec, train: Dataset, val: Dataset, yc: int, warm_theta: np.ndarray):
        self.victim = victim
        self.train = train
        self.val = val
        self.yc = int(yc)
        self.warm_theta = warm_theta
        self._cache: Dict[bytes, ConvexFit] = {}

    def fit_at(self, xc: np.ndarray) -> ConvexFit:
        key = np.asarray(xc, dtype=np.float64).tobytes()
        if key not in self._cache:
            augmented = self.train.with_points(xc[None, :], [self.yc])
            result = fit_convex(self.victim, augmented, theta0=self.warm_theta, tol=config.POISON_FIT_TOL)
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[key] = result
        return self._cache[key]

    def value(self, xc: np.ndarray) -> float:
        result = self.fit_at(xc)
        return -result.objective.val_loss(result.theta, result.X, self.val.dense_X(), self.val.y)

    def gradient(self, xc: np.ndarray) -> np.ndarray:
        result = self.fit_at(xc)
        return -_implicit_gradient(result, self.val, self.train.n_samples)

    def rank(self, xc: np.ndarray) -> Tuple[float, float]:
        """Ключ сравнения кандидатов: точность на валидации, затем минус потеря"""
        return _val_accuracy(self.fit_at(xc), self.val), self.value(xc)


@dataclass(frozen=True, eq=False)
class PoisoningResult:
    poison: Dataset
    traces: List[SolverTrace]
    val_accuracy_before: float
    val_accuracy_after: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "poison_points": self.poison.dense_X().tolist(),
            "poison_labels": self.poison.y.tolist(),
            "traces": [trace.to_dict() for trace in self.traces],
            "val_accuracy_before": self.val_accuracy_before,
            "val_accuracy_after": self.val_accuracy_after,
        }


def _feature_box(spec: PoisoningSpec, train: Dataset) -> Box:
    if spec.feature_box is None:
        bounds = bounding_box(train)
    else:
        bounds = np.asarray(spec.feature_box, dtype=np.float64)
        if bounds.shape != (train.n_features, 2):
            raise InvalidSpecError(
                f"feature_box должен задавать {train.n_features} пар (lo, hi), получено {bounds.shape[0]}"
            )
    return Box(bounds[:, 0], bounds[:, 1])


def _candidate_pool(spec: PoisoningSpec, train: Dataset, rng: np.random.Generator) -> List[Tuple[int, int]]:
    """Пары (индекс исходной точки, метка отравления); не больше n_candidates случайных"""
    if spec.poison_label is None:
        pool = [(i, int((train.y[i] + 1) % train.n_classes)) for i in range(train.n_samples)]
    else:
        candidates = np.flatnonzero(train.y != spec.poison_label)
        if candidates.size == 0:
            raise InvalidSpecError("Нет обучающих точек с меткой, отличной от poison_label")
        pool = [(int(i), int(spec.poison_label)) for i in candidates]
    if len(pool) > spec.n_candidates:
        chosen = np.sort(rng.choice(len(pool), size=spec.n_candidates, replace=False))
        pool = [pool[i] for i in chosen]
    return pool


@dataclass(frozen=True, eq=False)
class _PoisonCandidate:
    key: Tuple[float, float]
    x: np.ndarray
    label: int
    trace: SolverTrace
    outer: _PoisonObjective


def _poison_step(spec: PoisoningSpec, current: Dataset, current_fit: ConvexFit, train: Dataset,
                 val: Dataset, box: Box, rng: np.random.Generator) -> _PoisonCandidate:
    """
    Один жадный шаг: ранжирование копий с перевернутой меткой, запуск солвера
    из n_starts лучших, выбор лучшей точки среди стартовых и найденных.
    """
    warm = current_fit.objective.extend_theta(current_fit.theta, current.n_samples, current.n_samples + 1)
    outers: Dict[int, _PoisonObjective] = {}

    def outer_for(label: int) -> _PoisonObjective:
        if label not in outers:
            outers[label] = _PoisonObjective(spec.victim, current, val, label, warm)
        return outers[label]

    seeds = []
    for index, yc in _candidate_pool(spec, train, rng):
        x_seed = box.project(train.sample(index))
        seeds.append((outer_for(yc).rank(x_seed), index, yc, x_seed))
    seeds.sort(key=lambda item: item[:3])
    logger.debug(f"Кандидатов отравления: {len(seeds)}, лучший ключ {seeds[0][0]}")

    best: Optional[_PoisonCandidate] = None
    for seed_key, index, yc, x_seed in seeds[:spec.n_starts]:
        outer = outer_for(yc)
        xc, trace = solve(Problem(outer.value, box, outer.gradient), x_seed, spec.solver)
        # при равных ключах предпочтение оптимизированной точке
        for x_candidate, key in ((xc, outer.rank(xc)), (x_seed, seed_key)):
            if best is None or key < best.key:
                best = _PoisonCandidate(key, x_candidate, yc, trace, outer)
    return best


def _val_accuracy(result: ConvexFit, val: Dataset) -> float:
    return accuracy(val.y, result.model.predict_batch(val.X))


def run_poisoning(spec: PoisoningSpec, train: Dataset, val: Dataset) -> PoisoningResult:
    """Последовательная оптимизация n_poison точек отравления"""

    cap = int(np.floor(config.POISON_MAX_FRACTION * train.n_samples))
    if spec.n_poison > cap:
        raise InvalidSpecError(f"n_poison={spec.n_poison} превышает {config.POISON_MAX_FRACTION:.0%} обучающей выборки ({cap})")
    if spec.poison_label is not None and spec.poison_label >= train.n_classes:
        raise InvalidSpecError(f"poison_label {spec.poison_label} вне диапазона [0, {train.n_classes})")
    if val.n_features != train.n_features:
        raise InvalidSpecError("Валидационный и обучающий наборы разной размерности")

    box = _feature_box(spec, train)
    rng = np.random.default_rng(spec.seed)

    clean = fit_convex(spec.victim, train, tol=config.POISON_FIT_TOL)
    acc_before = _val_accuracy(clean, val)
    logger.info(f"Отравление '{spec.victim.kind}': {spec.n_poison} точек, точность до атаки {acc_before:.3f}")

    current, current_fit = train, clean
    poison_X, poison_y, traces = [], [], []
    for k in range(spec.n_poison):
        chosen = _poison_step(spec, current, current_fit, train, val, box, rng)
        current_fit = chosen.outer.fit_at(chosen.x)
        current = current.with_points(chosen.x[None, :], [chosen.label])
        poison_X.append(chosen.x)
        poison_y.append(chosen.label)
        traces.append(chosen.trace)
        logger.info(
            f"Точка отравления {k + 1}/{spec.n_poison}: метка {chosen.label}, "
            f"точность на валидации {chosen.key[0]:.3f}, валидационная потеря {-chosen.key[1]:.4f}"
        )

    acc_after = _val_accuracy(current_fit, val)
    logger.info(f"Точность на валидации: {acc_before:.3f} -> {acc_after:.3f}")

    poison = make_dataset(np.asarray(poison_X).reshape(-1, train.n_features), poison_y, train.n_classes)
    return PoisoningResult(poison, traces, acc_before, acc_after)
