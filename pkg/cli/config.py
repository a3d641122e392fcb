"""
Конфигурация эксперимента: JSON-файл, строго проверяемый pydantic-моделями

Неизвестные ключи запрещены на любом уровне вложенности. Пути к файлам
задаются относительно текущей директории и должны существовать.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    FilePath,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    model_validator,
)

from attacks.specs import EvasionSpec, PoisoningSpec
from errors import ConfigError
from models.specs import ModelSpec
from tensor_core.datasets import plate_mask
from optim.problem import SolverConfig

logger = logging.getLogger(__name__)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _expand_plate_mask(block: Any, source: Any):
    """Сокращение "patch_mask": "plate" -> маска номерного знака под размер изображений"""
    if not isinstance(block, dict) or not isinstance(block.get("evasion"), dict):
        return
    evasion = block["evasion"]
    if evasion.get("patch_mask") == "plate":
        size = source.get("size", 16) if isinstance(source, dict) else 16
        evasion["patch_mask"] = plate_mask(int(size)).tolist()


class BlobsData(_Strict):
    generator: Literal["blobs"]
    n: PositiveInt
    centers: List[List[float]]
    spread: PositiveFloat = 0.5
    seed: Optional[int] = None


class MoonsData(_Strict):
    generator: Literal["moons"]
    n: PositiveInt
    noise: float = Field(default=0.1, ge=0)
    seed: Optional[int] = None


class PlatesData(_Strict):
    generator: Literal["plates"]
    n: PositiveInt
    n_classes: int = Field(default=3, ge=2)
    noise: float = Field(default=0.1, ge=0)
    size: int = Field(default=16, ge=16)
    seed: Optional[int] = None


class CsvData(_Strict):
    generator: Literal["csv"]
    path: FilePath
    label_column: int


GeneratorBlock = Annotated[Union[BlobsData, MoonsData, PlatesData, CsvData], Field(discriminator="generator")]


class DatasetBlock(_Strict):
    source: GeneratorBlock
    test_fraction: float = Field(default=0.3, gt=0, lt=1)


class ModelBlock(_Strict):
    """Либо спецификация для обучения (spec), либо готовый файл модели (file)"""

    spec: Optional[ModelSpec] = None
    scaler: bool = False
    file: Optional[FilePath] = None

    @model_validator(mode="after")
    def _spec_xor_file(self):
        if (self.spec is None) == (self.file is None):
            raise ValueError("нужно указать ровно одно из полей spec или file")
        if self.file is not None and self.scaler:
            raise ValueError("scaler задается только вместе со spec")
        return self


class AttackBlock(_Strict):
    evasion: EvasionSpec
    solver: SolverConfig
    samples: Optional[List[NonNegativeInt]] = None
    explain_adversarial: bool = False


class SecEvalBlock(_Strict):
    evasion: EvasionSpec
    solver: SolverConfig
    eps_grid: List[float] = Field(min_length=1)
    samples: Optional[List[NonNegativeInt]] = None

    @model_validator(mode="before")
    @classmethod
    def _epsilon_placeholder(cls, data: Any) -> Any:
        # бюджет задается сеткой; epsilon в блоке атаки не обязателен
        if isinstance(data, dict) and isinstance(data.get("evasion"), dict):
            evasion = dict(data["evasion"])
            evasion.setdefault("epsilon", 0.0)
            data = {**data, "evasion": evasion}
        return data


class PoisonBlock(_Strict):
    spec: PoisoningSpec


class ExplainBlock(_Strict):
    method: Literal["integrated-gradients", "linear-surrogate", "influence"]
    samples: Optional[List[NonNegativeInt]] = None
    target: Optional[NonNegativeInt] = None
    m_steps: PositiveInt = 50
    baseline: Optional[List[float]] = None
    n_samples: PositiveInt = 1000
    kernel_width: PositiveFloat = 1.0
    seed: Optional[int] = None


class ExperimentConfig(_Strict):
    dataset: DatasetBlock
    model: Optional[ModelBlock] = None
    attack: Optional[AttackBlock] = None
    seceval: Optional[SecEvalBlock] = None
    poison: Optional[PoisonBlock] = None
    explain: Optional[ExplainBlock] = None
    output_dir: Optional[Path] = None
    workers: PositiveInt = 1
    seed: int = 0

    @model_validator(mode="before")
    @classmethod
    def _propagate_seed(cls, data: Any) -> Any:
        """Общий seed подставляется в блоки, где seed не указан; раскрываются сокращения"""
        if not isinstance(data, dict):
            return data
        seed = data.get("seed", 0)
        data = copy.deepcopy(data)
        source = data.get("dataset", {}).get("source") if isinstance(data.get("dataset"), dict) else None
        if isinstance(source, dict) and source.get("generator") != "csv" and source.get("seed") is None:
            source["seed"] = seed
        for block in ("attack", "seceval"):
            _expand_plate_mask(data.get(block), source)
            solver = (data.get(block) or {}).get("solver") if isinstance(data.get(block), dict) else None
            if isinstance(solver, dict) and solver.get("solver") == "random-search" and solver.get("seed") is None:
                solver["seed"] = seed
        explain = data.get("explain")
        if isinstance(explain, dict) and explain.get("seed") is None:
            explain["seed"] = seed
        return data

    def seeds(self) -> Dict[str, Optional[int]]:
        seeds: Dict[str, Optional[int]] = {"split": self.seed}
        source = self.dataset.source
        if not isinstance(source, CsvData):
            seeds["dataset"] = source.seed
        if self.model is not None and self.model.spec is not None:
            seeds["model"] = self.model.spec.seed
        for name in ("attack", "seceval"):
            block = getattr(self, name)
            if block is not None and block.solver.seed is not None:
                seeds[f"{name}_solver"] = block.solver.seed
        if self.poison is not None:
            seeds["poison"] = self.poison.spec.seed
        if self.explain is not None:
            seeds["explain"] = self.explain.seed
        return seeds


def _field_path(error: Dict[str, Any]) -> str:
    # discriminated union добавляет имя варианта в путь: убираем его
    parts = [str(part) for part in error.get("loc", ()) if part not in ("blobs", "moons", "plates", "csv")]
    return ".".join(parts)


def parse_config(data: Dict[str, Any], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Проверка словаря конфигурации; ошибка -> ConfigError с путем к полю"""
    if not isinstance(data, dict):
        raise ConfigError("конфигурация должна быть JSON-объектом")
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    try:
        return ExperimentConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        field = _field_path(first) or None
        raise ConfigError(first.get("msg", str(e)), field=field) from e


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> Tuple[ExperimentConfig, Dict[str, Any]]:
    """Загрузка конфигурации из JSON; возвращает проверенную модель и исходный словарь"""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Файл конфигурации не найден: {path}", field="config")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Ошибка чтения JSON конфигурации: {e}", field="config")
    cfg = parse_config(raw, overrides)
    logger.info(f"Конфигурация загружена из {path}")
    return cfg, raw


def require_block(cfg: ExperimentConfig, name: str, command: str):
    block = getattr(cfg, name)
    if block is None:
        raise ConfigError(f"блок '{name}' обязателен для команды {command}", field=name)
    return block
