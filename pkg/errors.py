#!/usr/bin/env python3
"""
Иерархия исключений advsec

Каждое исключение наследует и AdvSecError, и ближайшее встроенное исключение,
поэтому вызывающий код может ловить любое из них.
"""

from typing import Optional

import numpy as np


class AdvSecError(Exception):
    """Базовое исключение библиотеки"""


class InvalidValueError(AdvSecError, ValueError):
    """Нечисловые или бесконечные значения"""


class ShapeError(AdvSecError, ValueError):
    """Несовпадение размерностей"""


class EmptyDatasetError(AdvSecError, ValueError):
    """Пустой набор данных"""


class ParseError(AdvSecError, ValueError):
    """Ошибка разбора CSV с указанием позиции (нумерация с 1)"""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[int] = None):
        self.row = row
        self.column = column
        position = []
        if row is not None:
            position.append(f"строка {row}")
        if column is not None:
            position.append(f"столбец {column}")
        prefix = f"[{', '.join(position)}] " if position else ""
        super().__init__(f"{prefix}{message}")


class InvalidArgumentError(AdvSecError, ValueError):
    """Недопустимый аргумент операции"""


class DegenerateDataError(AdvSecError, ValueError):
    """Вырожденные данные (например, один класс)"""


class ConvergenceError(AdvSecError, RuntimeError):
    """Обучение не сошлось за отведенное число итераций"""

    def __init__(self, message: str, grad_norm: float):
        self.grad_norm = float(grad_norm)
        super().__init__(f"{message} (норма градиента {self.grad_norm:.3e})")


class NotDifferentiableError(AdvSecError, TypeError):
    """Запрос градиента у недифференцируемой модели или задачи"""


class InvalidSpecError(AdvSecError, ValueError):
    """Несогласованная спецификация потерь, атаки или модели"""


class NumericalError(AdvSecError, ArithmeticError):
    """Нечисловое значение целевой функции в солвере"""

    def __init__(self, message: str, iterate=None):
        self.iterate = None if iterate is None else np.array(iterate, dtype=float)
        super().__init__(message)


class IllConditionedError(AdvSecError, RuntimeError):
    """Факторизация гессиана не удалась даже с регуляризацией"""


class KernelWidthError(AdvSecError, ValueError):
    """Все веса локальной выборки суррогата пренебрежимо малы"""


class ConfigError(AdvSecError, ValueError):
    """Ошибка валидации конфигурации эксперимента"""

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        prefix = f"поле '{field}': " if field else ""
        super().__init__(f"{prefix}{message}")


class ParallelTaskError(AdvSecError, RuntimeError):
    """Ошибка обработчика в parallel_map с индексом образца"""

    def __init__(self, index: int, cause: BaseException):
        self.index = index
        self.cause = cause
        super().__init__(f"образец {index}: {type(cause).__name__}: {cause}")
