"""
Задача оптимизации, конфигурация солвера и трасса выполнения

Задача (Problem) отделена от алгоритма ее решения: один и тот же Problem
принимают все солверы, меняется только SolverConfig.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

import config
from optim.constraints import Constraint

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Problem:
    """min objective(x) при x из constraint; gradient необязателен"""

    objective: Objective
    constraint: Constraint
    gradient: Optional[Gradient] = None

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None


SolverName = Literal["pgd", "pgd-ls", "random-search"]

SOLVER_FIELDS: Dict[str, Dict[str, Any]] = {
    "pgd": {"step_size": config.DEFAULT_STEP_SIZE},
    "pgd-ls": {"ls_max_evals": config.DEFAULT_LS_MAX_EVALS, "ls_min_step": config.DEFAULT_LS_MIN_STEP},
    "random-search": {"sigma": config.DEFAULT_SIGMA, "trials": config.DEFAULT_TRIALS, "seed": 0},
}
SOLVER_OPTIONAL_FIELDS = ("step_size", "ls_max_evals", "ls_min_step", "sigma", "trials", "seed")

GRADIENT_SOLVERS = ("pgd", "pgd-ls")


class SolverConfig(BaseModel):
    """Параметры солвера; поля, специфичные для солвера, заполняются по умолчанию"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    solver: SolverName
    max_iter: PositiveInt = config.DEFAULT_MAX_ITER
    step_size: Optional[float] = Field(default=None, gt=0)
    ls_max_evals: Optional[PositiveInt] = None
    ls_min_step: Optional[float] = Field(default=None, gt=0)
    sigma: Optional[float] = Field(default=None, gt=0)
    trials: Optional[PositiveInt] = None
    seed: Optional[int] = None
    stop_tol: float = Field(default=0.0, ge=0)
    max_fun_evals: Optional[PositiveInt] = None

    @model_validator(mode="before")
    @classmethod
    def _solver_fields(cls, data: Any) -> Any:
        if not isinstance(data, dict) or data.get("solver") not in SOLVER_FIELDS:
            return data
        solver = data["solver"]
        defaults = SOLVER_FIELDS[solver]
        data = dict(data)
        for name in SOLVER_OPTIONAL_FIELDS:
            if name in defaults:
                if data.get(name) is None:
                    data[name] = defaults[name]
            elif data.get(name) is not None:
                raise ValueError(f"поле '{name}' не применимо к солверу '{solver}'")
        return data

    @property
    def needs_gradient(self) -> bool:
        return self.solver in GRADIENT_SOLVERS


STOP_REASONS = ("max-iter", "tol-reached", "budget-exhausted")


@dataclass
class SolverTrace:
    """Принятые итерации, значения целевой функции и счетчики вызовов"""

    points: List[np.ndarray] = field(default_factory=list)
    losses: List[float] = field(default_factory=list)
    n_fun_evals: int = 0
    n_grad_evals: int = 0
    stop_reason: str = "max-iter"

    def record(self, x: np.ndarray, loss: float):
        point = np.array(x, dtype=np.float64)
        point.flags.writeable = False
        self.points.append(point)
        self.losses.append(float(loss))

    @property
    def n_iterations(self) -> int:
        return len(self.points) - 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [point.tolist() for point in self.points],
            "losses": list(self.losses),
            "n_fun_evals": self.n_fun_evals,
            "n_grad_evals": self.n_grad_evals,
            "stop_reason": self.stop_reason,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SolverTrace":
        trace = cls(n_fun_evals=int(data["n_fun_evals"]), n_grad_evals=int(data["n_grad_evals"]),
                    stop_reason=str(data["stop_reason"]))
        for point, loss in zip(data["points"], data["losses"]):
            trace.record(np.asarray(point, dtype=np.float64), loss)
        return trace
