"""
Сохранение и загрузка моделей

Формат файла (JSON, версия 1):
{
  "format": "advsec-model",
  "version": 1,
  "spec": {...ModelSpec...},
  "n_classes": int,
  "n_features": int,
  "params": {имя: вложенные списки чисел},
  "scaler": null | {"minimum": [...], "maximum": [...]}
}
Числа пишутся с точностью, достаточной для точного восстановления float64.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
from pydantic import ValidationError

from errors import InvalidSpecError, ParseError
from models.base import Classifier, TrainedModel
from models.chain import MinMaxScaler, ModuleChain
from models.forest import RandomForestModel
from models.kernel import KernelSVM
from models.linear import LinearModel
from models.mlp import MLPModel
from models.specs import ModelSpec

logger = logging.getLogger(__name__)

MODEL_FORMAT = "advsec-model"
MODEL_FORMAT_VERSION = 1

MODEL_CLASSES = {
    "logreg": LinearModel,
    "svm-linear": LinearModel,
    "svm-rbf": KernelSVM,
    "mlp": MLPModel,
    "random-forest": RandomForestModel,
}


def save_json(data: Dict[str, Any], file_path: Union[str, Path]):
    """Сохранить данные в JSON файл (ключи отсортированы, отступ 2)"""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, 'w', encoding='utf-8') as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug(f"Данные сохранены в {file_path}")


def model_to_dict(model: Classifier) -> Dict[str, Any]:
    scaler = None
    if isinstance(model, ModuleChain):
        scaler = model.preprocessor.to_dict()
        model = model.model
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "spec": model.spec.model_dump(mode="json"),
        "n_classes": model.n_classes,
        "n_features": model.n_features,
        "params": {name: value.tolist() for name, value in model.get_params().items()},
        "scaler": scaler,
    }


def model_from_dict(data: Dict[str, Any]) -> Classifier:
    if data.get("format") != MODEL_FORMAT:
        raise ParseError(f"Неизвестный формат модели: {data.get('format')!r}")
    if data.get("version") != MODEL_FORMAT_VERSION:
        raise ParseError(f"Неподдерживаемая версия формата модели: {data.get('version')!r}")
    try:
        spec = ModelSpec.model_validate(data["spec"])
    except ValidationError as e:
        raise InvalidSpecError(f"Некорректная спецификация модели в файле: {e}") from e
    params = {name: np.asarray(value, dtype=np.float64) for name, value in data["params"].items()}
    model = MODEL_CLASSES[spec.kind].from_params(spec, int(data["n_classes"]), int(data["n_features"]), params)
    if data.get("scaler") is not None:
        return ModuleChain(MinMaxScaler.from_dict(data["scaler"]), model)
    return model


def save_model(model: Union[TrainedModel, ModuleChain], path: Union[str, Path]) -> Path:
    path = Path(path)
    save_json(model_to_dict(model), path)
    logger.info(f"Модель '{model.kind}' сохранена в {path}")
    return path


def load_model(path: Union[str, Path]) -> Classifier:
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"Не удалось прочитать файл модели {path}: {e}") from e
    try:
        model = model_from_dict(data)
    except (KeyError, TypeError) as e:
        raise ParseError(f"Файл модели {path} поврежден: {e}") from e
    logger.info(f"Модель '{model.kind}' загружена из {path}")
    return model
