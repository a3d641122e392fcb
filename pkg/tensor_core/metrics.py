"""
Метрики качества классификации
"""

from typing import Sequence

import numpy as np

from errors import InvalidArgumentError


def accuracy(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    """Доля точных совпадений меток"""
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.shape[0] != y_pred.shape[0]:
        raise InvalidArgumentError(f"Длины меток различаются: {y_true.shape[0]} и {y_pred.shape[0]}")
    if y_true.shape[0] == 0:
        raise InvalidArgumentError("accuracy() не определена для пустого набора")
    return float(np.mean(y_true == y_pred))
