"""
Декларативные спецификации моделей и функций потерь
"""

import math
from typing import Any, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator, model_validator

import config

ModelKind = Literal["logreg", "svm-linear", "svm-rbf", "mlp", "random-forest"]

# Поля, специфичные для вида модели, и их значения по умолчанию
KIND_FIELDS: Dict[str, Dict[str, Any]] = {
    "logreg": {"regularization": config.DEFAULT_REGULARIZATION},
    "svm-linear": {"regularization": config.DEFAULT_REGULARIZATION},
    "svm-rbf": {"regularization": config.DEFAULT_REGULARIZATION, "gamma": config.DEFAULT_RBF_GAMMA},
    "mlp": {
        "regularization": config.DEFAULT_REGULARIZATION,
        "hidden_sizes": config.DEFAULT_HIDDEN_SIZES,
        "epochs": config.DEFAULT_MLP_EPOCHS,
        "learning_rate": config.DEFAULT_MLP_LEARNING_RATE,
    },
    "random-forest": {"n_trees": config.DEFAULT_N_TREES, "max_depth": config.DEFAULT_MAX_DEPTH},
}
OPTIONAL_FIELDS = ("regularization", "gamma", "hidden_sizes", "epochs", "learning_rate", "n_trees", "max_depth")

CONVEX_KINDS = ("logreg", "svm-linear", "svm-rbf")


class ModelSpec(BaseModel):
    """Спецификация классификатора; поля вида модели заполняются по умолчанию"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ModelKind
    regularization: Optional[float] = Field(default=None, gt=0)
    gamma: Optional[float] = Field(default=None, gt=0)
    hidden_sizes: Optional[Tuple[PositiveInt, ...]] = None
    epochs: Optional[PositiveInt] = None
    learning_rate: Optional[float] = Field(default=None, gt=0)
    n_trees: Optional[PositiveInt] = None
    max_depth: Optional[PositiveInt] = None
    seed: int = 0

    @model_validator(mode="before")
    @classmethod
    def _kind_fields(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "kind" not in data:
            return data
        kind = data["kind"]
        defaults = KIND_FIELDS.get(kind)
        if defaults is None:
            return data
        data = dict(data)
        for name in OPTIONAL_FIELDS:
            if name in defaults:
                if data.get(name) is None:
                    data[name] = defaults[name]
            elif data.get(name) is not None:
                raise ValueError(f"поле '{name}' не применимо к модели вида '{kind}'")
        return data

    @field_validator("hidden_sizes")
    @classmethod
    def _hidden_depth(cls, value):
        if value is not None and not 1 <= len(value) <= 2:
            raise ValueError("hidden_sizes: допускается 1 или 2 скрытых слоя")
        return value

    @property
    def differentiable(self) -> bool:
        return self.kind != "random-forest"

    @property
    def convex(self) -> bool:
        return self.kind in CONVEX_KINDS


LossKind = Literal["cross-entropy", "cw-logit-diff"]


class LossSpec(BaseModel):
    """Функция потерь атаки: кросс-энтропия или CW-разность логитов с запасом kappa"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: LossKind = "cross-entropy"
    target_label: Optional[int] = Field(default=None, ge=0)
    kappa: float = Field(default=config.DEFAULT_KAPPA, ge=0)

    @field_validator("kappa")
    @classmethod
    def _finite_kappa(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("kappa должна быть конечной")
        return value

    @property
    def targeted(self) -> bool:
        return self.target_label is not None
