#!/usr/bin/env python3
"""
Конфигурация библиотеки advsec: значения по умолчанию и логирование
"""

import os
import logging
from pathlib import Path
from typing import Optional

VERSION = "0.1.0"

# Базовая директория проекта
BASE_DIR = Path(__file__).parent

# Директории
EXPERIMENTS_DIR = BASE_DIR / "experiments"
DEFAULT_OUTPUT_DIR = BASE_DIR / "runs"

# Обучение моделей
DEFAULT_REGULARIZATION = 1e-2
DEFAULT_RBF_GAMMA = 1.0
DEFAULT_HIDDEN_SIZES = (16,)
DEFAULT_MLP_EPOCHS = 2000
DEFAULT_MLP_LEARNING_RATE = 0.5
DEFAULT_N_TREES = 10
DEFAULT_MAX_DEPTH = 4
FIT_TOL = 1e-8
FIT_MAX_ITER = 200
KERNEL_JITTER = 1e-8

# Солверы
DEFAULT_MAX_ITER = 50
PGD_MAX_HALVINGS = 10
STOP_WINDOW = 5
RS_SHRINK = 0.8
RS_GROW = 1.2
PROJECTION_BISECT_ITERS = 100
# значения по умолчанию для полей конкретного солвера
DEFAULT_STEP_SIZE = 0.1
DEFAULT_LS_MAX_EVALS = 20
DEFAULT_LS_MIN_STEP = 1e-3
DEFAULT_SIGMA = 0.1
DEFAULT_TRIALS = 10

# Атаки
POISON_FIT_TOL = 1e-10
POISON_MAX_FRACTION = 0.2
# кандидаты (точка, метка) на шаг отравления и число стартов внешнего солвера
POISON_CANDIDATES = 100
POISON_STARTS = 3
HESSIAN_JITTER = 1e-10
DEFAULT_KAPPA = 0.0
# пример высокоуверенной атаки: kappa = 1e6
HIGH_CONFIDENCE_KAPPA = 1e6

# Объяснения
IG_STEPS = 50
SURROGATE_RIDGE = 1e-3
SURROGATE_SCALE = 0.1
SURROGATE_MIN_WEIGHT = 1e-12

# Допуск проверки принадлежности допустимому множеству
FEASIBILITY_TOL = 1e-9

# Логирование
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(levelname)s - %(asctime)s - %(name)s - %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_installed_handlers = []


def setup_logging(log_file: Optional[Path] = None, level: Optional[str] = None) -> logging.Logger:
    """Настройка логирования: stderr и (опционально) файл, по строке на событие"""

    level_name = (level or LOG_LEVEL).upper()
    root_logger = logging.getLogger()

    # Повторный вызов заменяет обработчики, а не дублирует их
    for handler in _installed_handlers:
        root_logger.removeHandler(handler)
        handler.close()
    _installed_handlers.clear()

    formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(getattr(logging, level_name, logging.INFO))
    console_handler.setFormatter(formatter)
    _installed_handlers.append(console_handler)

    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        _installed_handlers.append(file_handler)

    root_logger.setLevel(logging.DEBUG)
    # matplotlib пишет слишком много отладочных сообщений
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    for handler in _installed_handlers:
        root_logger.addHandler(handler)

    return root_logger
