"""
Кривые оценки защищенности: точность как функция бюджета возмущения epsilon

Для каждого образца атаки идут по возрастающей сетке epsilon с теплым стартом
из предыдущей атакующей точки. Образец, обманувший модель при epsilon_i,
считается обманувшим и при всех больших epsilon, поэтому кривая не возрастает.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from attacks.evasion import run_evasion
from attacks.specs import EvasionSpec
from errors import EmptyDatasetError, InvalidArgumentError
from models.base import Classifier
from optim.problem import SolverConfig
from tensor_core.datasets import Dataset

logger = logging.getLogger(__name__)

CSV_HEADER = ("eps", "accuracy", "mean_confidence_drop")

Mapper = Callable[[Callable[[int], Any], Sequence[int]], List[Any]]


def sequential_map(worker: Callable[[int], Any], items: Sequence[int]) -> List[Any]:
    return [worker(item) for item in items]


@dataclass(frozen=True, eq=False)
class SecurityEvalCurve:
    eps_grid: np.ndarray
    accuracy_at_eps: np.ndarray
    mean_confidence_drop: np.ndarray
    attack_spec: Dict[str, Any]
    solver_config: Dict[str, Any]
    #: образцы истинного класса, совпадающего с целевым; они не атакуются
    n_unattacked: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eps_grid": self.eps_grid.tolist(),
            "accuracy_at_eps": self.accuracy_at_eps.tolist(),
            "mean_confidence_drop": self.mean_confidence_drop.tolist(),
            "attack_spec": self.attack_spec,
            "solver_config": self.solver_config,
            "n_unattacked": self.n_unattacked,
        }

    def csv_rows(self) -> List[Tuple[float, float, float]]:
        return [
            (float(eps), float(acc), float(drop))
            for eps, acc, drop in zip(self.eps_grid, self.accuracy_at_eps, self.mean_confidence_drop)
        ]

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in self.csv_rows():
                writer.writerow([repr(value) for value in row])
        return path


def check_eps_grid(eps_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(eps_grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise InvalidArgumentError("Сетка epsilon пуста")
    if not np.all(np.isfinite(grid)):
        raise InvalidArgumentError("Сетка epsilon содержит нечисловые значения")
    if grid[0] != 0.0:
        raise InvalidArgumentError("Сетка epsilon должна начинаться с 0")
    if np.any(np.diff(grid) <= 0):
        raise InvalidArgumentError("Сетка epsilon должна строго возрастать")
    return grid


def sample_curve(m: Classifier, x: np.ndarray, y: int, spec: EvasionSpec,
                 eps_grid: np.ndarray, cfg: SolverConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Корректность предсказания и падение оценки истинного класса по сетке для одного образца"""

    clean_score = m.decision_scores(x)[y]
    correct = np.zeros(eps_grid.shape[0], dtype=bool)
    drops = np.zeros(eps_grid.shape[0])
    if spec.targeted and spec.loss.target_label == y:
        correct[:] = m.predict(x) == y
        return correct, drops

    x_current = x
    evaded = False
    for i, eps in enumerate(eps_grid):
        if eps == 0.0:
            x_current = x
        elif not evaded:
            result = run_evasion(m, x, y, spec.with_epsilon(float(eps)), cfg, x_init=x_current)
            x_current = result.x_adv
        if not evaded:
            evaded = m.predict(x_current) != y
        correct[i] = not evaded
        drops[i] = clean_score - m.decision_scores(x_current)[y]
    return correct, drops


def security_evaluation(m: Classifier, test: Dataset, spec: EvasionSpec, eps_grid: Sequence[float],
                        cfg: SolverConfig, mapper: Optional[Mapper] = None) -> SecurityEvalCurve:
    """
    Кривая защищенности на тестовом наборе; epsilon из spec игнорируется.
    mapper(worker, indices) позволяет распараллелить образцы с сохранением порядка.
    """
    grid = check_eps_grid(eps_grid)
    if test.n_samples == 0:
        raise EmptyDatasetError("Пустой тестовый набор")
    mapper = mapper or sequential_map
    X = test.dense_X()

    def worker(index: int):
        return sample_curve(m, X[index], int(test.y[index]), spec, grid, cfg)

    per_sample = mapper(worker, list(range(test.n_samples)))
    correct = np.vstack([c for c, _ in per_sample])
    drops = np.vstack([d for _, d in per_sample])

    curve = SecurityEvalCurve(
        eps_grid=grid,
        accuracy_at_eps=correct.mean(axis=0),
        mean_confidence_drop=drops.mean(axis=0),
        attack_spec=spec.model_dump(mode="json"),
        solver_config=cfg.model_dump(mode="json"),
        n_unattacked=int(np.sum(test.y == spec.loss.target_label)) if spec.targeted else 0,
    )
    logger.info(
        f"Кривая защищенности: {test.n_samples} образцов, точность "
        + ", ".join(f"{eps:g}:{acc:.3f}" for eps, acc in zip(grid, curve.accuracy_at_eps))
    )
    return curve
