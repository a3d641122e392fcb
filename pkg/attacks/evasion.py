"""
Атаки уклонения (evasion) на этапе тестирования

Атака строит Problem из потери и составного ограничения (epsilon-шар,
границы входа, маска патча) и решает ее выбранным солвером. Переход от
white-box к black-box атаке сводится к смене солвера в SolverConfig.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from attacks.specs import EvasionSpec
from errors import InvalidSpecError, NotDifferentiableError
from models.base import Classifier
from models.losses import loss_value, loss_value_and_gradient
from optim.constraints import Box, Constraint, Intersection, Masked, ball
from optim.problem import Problem, SolverConfig, SolverTrace
from optim.solvers import solve
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AttackResult:
    """Результат атаки на один образец"""

    x_adv: np.ndarray
    success: bool
    true_label: int
    target_label: Optional[int]
    initial_label: int
    final_label: int
    trace: SolverTrace
    per_iteration_scores: List[np.ndarray]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x_adv": self.x_adv.tolist(),
            "success": self.success,
            "true_label": self.true_label,
            "target_label": self.target_label,
            "initial_label": self.initial_label,
            "final_label": self.final_label,
            "trace": self.trace.to_dict(),
            "per_iteration_scores": [scores.tolist() for scores in self.per_iteration_scores],
        }


def build_constraint(x: np.ndarray, spec: EvasionSpec) -> Constraint:
    """epsilon-шар вокруг x, пересеченный с границами входа и ограниченный маской патча"""
    feasible: Constraint
    bounds = Box(*spec.input_bounds) if spec.input_bounds is not None else None
    if spec.epsilon is not None:
        feasible = ball(spec.norm, x, spec.epsilon)
        if bounds is not None:
            feasible = Intersection(feasible, bounds)
    elif bounds is not None:
        feasible = bounds
    else:
        feasible = Box(-np.inf, np.inf)
    if spec.patch_mask is not None:
        feasible = Masked(feasible, np.asarray(spec.patch_mask, dtype=bool), x)
    return feasible


def _check_spec(m: Classifier, y_true: int, spec: EvasionSpec, cfg: SolverConfig):
    if spec.patch_mask is not None and len(spec.patch_mask) != m.n_features:
        raise InvalidSpecError(f"Длина patch_mask {len(spec.patch_mask)} не равна числу признаков {m.n_features}")
    if not 0 <= y_true < m.n_classes:
        raise InvalidSpecError(f"Истинная метка {y_true} вне диапазона [0, {m.n_classes})")
    if spec.targeted:
        if spec.loss.target_label >= m.n_classes:
            raise InvalidSpecError(f"target_label {spec.loss.target_label} вне диапазона [0, {m.n_classes})")
        if spec.loss.target_label == y_true:
            raise InvalidSpecError("Целевой класс совпадает с истинной меткой")
    elif spec.loss.kind == "cw-logit-diff":
        raise InvalidSpecError("потеря cw-logit-diff требует target_label")
    if cfg.needs_gradient and not m.differentiable:
        raise NotDifferentiableError(
            f"Солвер '{cfg.solver}' требует градиенты, модель '{m.kind}' не дифференцируема"
        )


def evasion_problem(m: Classifier, x: np.ndarray, y_true: int, spec: EvasionSpec) -> Problem:
    """
    Нецелевая атака минимизирует -CE(x, y_true); целевая минимизирует CE к целевому
    классу или CW-разность логитов.
    """
    if spec.targeted:
        sign, label = 1.0, spec.loss.target_label
    else:
        sign, label = -1.0, y_true

    def objective(z: np.ndarray) -> float:
        return sign * loss_value(m, z, label, spec.loss)

    def gradient(z: np.ndarray) -> np.ndarray:
        _, grad = loss_value_and_gradient(m, z, label, spec.loss)
        return sign * grad

    return Problem(objective, build_constraint(x, spec), gradient if m.differentiable else None)


def run_evasion(m: Classifier, x: ArrayLike, y_true: int, spec: EvasionSpec, cfg: SolverConfig,
                x_init: Optional[ArrayLike] = None) -> AttackResult:
    """Атака уклонения на один образец; x_init задает теплый старт (проецируется)"""

    x = as_vector(x, m.n_features)
    y_true = int(y_true)
    _check_spec(m, y_true, spec, cfg)

    problem = evasion_problem(m, x, y_true, spec)
    start = x if x_init is None else as_vector(x_init, m.n_features)
    x_adv, trace = solve(problem, start, cfg)

    initial_label = m.predict(x)
    final_label = m.predict(x_adv)
    target = spec.loss.target_label
    success = final_label == target if spec.targeted else final_label != y_true

    scores = [m.decision_scores(point) for point in trace.points]
    logger.debug(
        f"Атака {cfg.solver}: метка {initial_label} -> {final_label}, успех={success}, "
        f"итераций {trace.n_iterations}"
    )
    return AttackResult(x_adv, bool(success), y_true, target, initial_label, final_label, trace, scores)
