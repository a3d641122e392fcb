"""
Декларативные спецификации атак уклонения и отравления
"""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, field_validator, model_validator

import config
from models.specs import LossSpec, ModelSpec
from optim.problem import SolverConfig


class EvasionSpec(BaseModel):
    """
    Атака уклонения: потеря, норма и бюджет epsilon, маска патча, общие
    границы входа. Без epsilon допустима только атака на патч.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    loss: LossSpec = LossSpec()
    norm: Literal["l2", "linf"] = "l2"
    epsilon: Optional[float] = Field(default=None, ge=0, allow_inf_nan=False)
    patch_mask: Optional[Tuple[bool, ...]] = None
    input_bounds: Optional[Tuple[float, float]] = None

    @field_validator("input_bounds")
    @classmethod
    def _ordered_bounds(cls, value):
        if value is not None and value[0] > value[1]:
            raise ValueError("input_bounds: нижняя граница больше верхней")
        return value

    @model_validator(mode="after")
    def _budget_or_patch(self):
        if self.epsilon is None and self.patch_mask is None:
            raise ValueError("нужен epsilon или patch_mask")
        return self

    @property
    def targeted(self) -> bool:
        return self.loss.targeted

    def with_epsilon(self, epsilon: float) -> "EvasionSpec":
        return EvasionSpec.model_validate({**self.model_dump(), "epsilon": epsilon})


class PoisoningSpec(BaseModel):
    """
    Атака отравлением гладкой выпуклой модели-жертвы

    На каждом шаге n_candidates копий обучающих точек с перевернутой меткой
    ранжируются по точности на валидации, внешний солвер запускается из
    n_starts лучших.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    victim: ModelSpec
    n_poison: NonNegativeInt
    poison_label: Optional[NonNegativeInt] = None
    feature_box: Optional[List[Tuple[float, float]]] = None
    solver: SolverConfig = SolverConfig(solver="pgd-ls")
    n_candidates: PositiveInt = config.POISON_CANDIDATES
    n_starts: PositiveInt = config.POISON_STARTS
    seed: int = 0

    @field_validator("victim")
    @classmethod
    def _convex_victim(cls, value: ModelSpec) -> ModelSpec:
        if not value.convex:
            raise ValueError(f"жертва должна быть гладкой выпуклой моделью, получено '{value.kind}'")
        return value

    @field_validator("feature_box")
    @classmethod
    def _ordered_box(cls, value):
        if value is not None and any(lo > hi for lo, hi in value):
            raise ValueError("feature_box: нижняя граница больше верхней")
        return value
