"""
Наборы данных: генераторы, загрузка CSV и разбиение на обучение/тест

Генераторы зависят только от своих аргументов, включая seed.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import (
    EmptyDatasetError,
    InvalidArgumentError,
    InvalidValueError,
    ParseError,
    ShapeError,
)
from tensor_core.tensor import ArrayLike, Tensor

logger = logging.getLogger(__name__)

# Прямоугольник "номерного знака" на изображениях 16x16: строки, столбцы
PLATE_ROWS = (10, 14)
PLATE_COLS = (3, 13)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Выборка: признаки X (n_samples x n_features), метки y, число классов"""

    X: Tensor
    y: np.ndarray
    n_classes: int
    feature_bounds: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.X.ndim != 2:
            raise ShapeError(f"X должен быть матрицей, получена форма {self.X.shape}")
        labels = np.array(self.y, dtype=np.int64).ravel()
        labels.flags.writeable = False
        object.__setattr__(self, "y", labels)
        if labels.shape[0] != self.X.shape[0]:
            raise ShapeError(f"Число строк X ({self.X.shape[0]}) не равно числу меток ({labels.shape[0]})")
        if self.n_classes < 1:
            raise InvalidArgumentError("n_classes должно быть положительным")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise InvalidArgumentError(f"Метки должны лежать в [0, {self.n_classes})")
        if self.feature_bounds is not None:
            bounds = np.array(self.feature_bounds, dtype=np.float64)
            if bounds.shape != (self.X.shape[1], 2):
                raise ShapeError("feature_bounds должен иметь форму (n_features, 2)")
            if np.any(bounds[:, 0] > bounds[:, 1]):
                raise InvalidArgumentError("feature_bounds: нижняя граница больше верхней")
            dense = self.X.to_dense()
            if dense.size and (np.any(dense < bounds[:, 0]) or np.any(dense > bounds[:, 1])):
                raise InvalidValueError("Образцы выходят за feature_bounds")
            bounds.flags.writeable = False
            object.__setattr__(self, "feature_bounds", bounds)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def dense_X(self) -> np.ndarray:
        return self.X.to_dense()

    def sample(self, index: int) -> np.ndarray:
        return self.X.row(index).to_dense()

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(self.X.take_rows(indices), self.y[np.asarray(indices, dtype=np.int64)],
                       self.n_classes, self.feature_bounds)

    def with_points(self, X_new: ArrayLike, y_new: Sequence[int]) -> "Dataset":
        """Новый набор с добавленными точками (границы признаков не переносятся)"""
        X_new = np.atleast_2d(np.asarray(X_new, dtype=np.float64))
        X_all = np.vstack([self.dense_X(), X_new]) if X_new.size else self.dense_X()
        y_all = np.concatenate([self.y, np.asarray(y_new, dtype=np.int64)])
        return Dataset(Tensor.dense(X_all), y_all, self.n_classes)


def make_dataset(X: ArrayLike, y: Sequence[int], n_classes: Optional[int] = None,
                 feature_bounds=None) -> Dataset:
    """Удобный конструктор Dataset из массивов"""
    tensor = Tensor.of(X)
    labels = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 1
    return Dataset(tensor, labels, n_classes, feature_bounds)


def make_blobs(n: int, centers: Sequence[Sequence[float]], spread: float, seed: int) -> Dataset:
    """Изотропные гауссовы облака вокруг центров; метка = индекс центра"""

    if n <= 0:
        raise EmptyDatasetError("make_blobs: n должно быть положительным")
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] == 0:
        raise InvalidArgumentError("make_blobs: нужен непустой список центров одинаковой размерности")
    if spread <= 0:
        raise InvalidArgumentError("make_blobs: spread должен быть положительным")

    rng = np.random.default_rng(seed)
    k, dim = centers.shape
    labels = np.arange(n) % k
    X = centers[labels] + spread * rng.standard_normal((n, dim))
    order = rng.permutation(n)
    return Dataset(Tensor.dense(X[order]), labels[order], k)


def make_moons(n: int, noise: float, seed: int) -> Dataset:
    """Две вложенные полуокружности в 2D (стандартная конструкция)"""

    if n <= 0:
        raise EmptyDatasetError("make_moons: n должно быть положительным")
    if noise < 0:
        raise InvalidArgumentError("make_moons: noise не может быть отрицательным")

    rng = np.random.default_rng(seed)
    n_outer = n // 2
    n_inner = n - n_outer

    # верхняя дуга с центром в начале координат, нижняя с центром в (1, 0.5)
    t_outer = np.linspace(0.0, np.pi, n_outer)
    t_inner = np.linspace(0.0, np.pi, n_inner)
    outer = np.column_stack([np.cos(t_outer), np.sin(t_outer)])
    inner = np.column_stack([1.0 - np.cos(t_inner), 0.5 - np.sin(t_inner)])

    X = np.vstack([outer, inner])
    y = np.concatenate([np.zeros(n_outer, dtype=np.int64), np.ones(n_inner, dtype=np.int64)])
    order = rng.permutation(n)
    X, y = X[order], y[order]
    if noise > 0:
        X = X + noise * rng.standard_normal(X.shape)
    return Dataset(Tensor.dense(X), y, 2)


def plate_mask(size: int = 16) -> np.ndarray:
    """Булева маска пикселей "номерного знака" (строки 10-13, столбцы 3-12)"""
    mask = np.zeros((size, size), dtype=bool)
    mask[PLATE_ROWS[0]:PLATE_ROWS[1], PLATE_COLS[0]:PLATE_COLS[1]] = True
    return mask.ravel()


def make_plate_images(n: int, n_classes: int = 3, noise: float = 0.1, seed: int = 0,
                      size: int = 16) -> Dataset:
    """
    Синтетические изображения size x size в [0, 1]

    Каждый класс несет свой код внутри прямоугольника номерного знака
    и слабую подсказку (яркое пятно) в верхней части кадра.
    """

    if n <= 0:
        raise EmptyDatasetError("make_plate_images: n должно быть положительным")
    if n_classes < 2:
        raise InvalidArgumentError("make_plate_images: нужно не менее двух классов")
    if size < 16:
        raise InvalidArgumentError("make_plate_images: размер изображения не меньше 16")

    rng = np.random.default_rng(seed)
    plate_h = PLATE_ROWS[1] - PLATE_ROWS[0]
    plate_w = PLATE_COLS[1] - PLATE_COLS[0]

    # Коды классов: фиксированный генератор, не зависящий от seed
    code_rng = np.random.default_rng(12345)
    codes = code_rng.random((n_classes, plate_h, plate_w)) > 0.5

    templates = np.full((n_classes, size, size), 0.3)
    for c in range(n_classes):
        plate = np.where(codes[c], 0.9, 0.1)
        templates[c, PLATE_ROWS[0]:PLATE_ROWS[1], PLATE_COLS[0]:PLATE_COLS[1]] = plate
        col = 2 + (c * 4) % (size - 4)
        templates[c, 2:5, col:col + 3] = 0.6

    labels = np.arange(n) % n_classes
    images = templates[labels].reshape(n, -1) + noise * rng.standard_normal((n, size * size))
    images = np.clip(images, 0.0, 1.0)
    order = rng.permutation(n)
    bounds = np.tile([0.0, 1.0], (size * size, 1))
    return Dataset(Tensor.dense(images[order]), labels[order], n_classes, bounds)


def _parse_float(text: str) -> Optional[float]:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if np.isfinite(value) else None


def load_csv(path: Union[str, Path], label_column: int) -> Dataset:
    """
    Загрузка CSV: запятая-разделитель, UTF-8, десятичная точка

    Заголовок распознается автоматически: первая строка, в которой нет ни одного
    числа. Целые метки нумеруются подряд по возрастанию, строковые по порядку
    первого появления. Позиции в ошибках нумеруются с 1.
    """

    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            rows = [row for row in csv.reader(f)]
    except OSError as e:
        raise ParseError(f"Не удалось прочитать файл {path}: {e}") from e

    numbered = [(i + 1, [field.strip() for field in row]) for i, row in enumerate(rows)
                if any(field.strip() for field in row)]
    if numbered and all(_parse_float(field) is None for field in numbered[0][1]):
        logger.info(f"Обнаружен заголовок CSV: {numbered[0][1]}")
        numbered = numbered[1:]
    if not numbered:
        raise EmptyDatasetError(f"CSV {path} не содержит данных")

    width = len(numbered[0][1])
    if not 0 <= label_column < width:
        raise InvalidArgumentError(f"label_column={label_column} вне диапазона [0, {width})")

    features, raw_labels = [], []
    for row_no, fields in numbered:
        if len(fields) != width:
            raise ParseError(f"ожидается {width} полей, найдено {len(fields)}", row=row_no)
        values = []
        for col, field in enumerate(fields):
            if col == label_column:
                continue
            value = _parse_float(field)
            if value is None:
                raise ParseError(f"нечисловое значение признака '{field}'", row=row_no, column=col + 1)
            values.append(value)
        features.append(values)
        raw_labels.append(fields[label_column])

    labels = _encode_labels(raw_labels)
    n_classes = int(labels.max()) + 1
    logger.info(f"Загружено {len(features)} образцов, {width - 1} признаков, {n_classes} классов из {path.name}")
    return Dataset(Tensor.dense(np.asarray(features, dtype=np.float64)), labels, n_classes)


def _encode_labels(raw_labels: List[str]) -> np.ndarray:
    """Целые метки нумеруются подряд по возрастанию, строки в порядке первого появления"""
    try:
        as_int = np.asarray([int(label) for label in raw_labels], dtype=np.int64)
    except ValueError:
        as_int = None
    if as_int is not None:
        return np.searchsorted(np.unique(as_int), as_int).astype(np.int64)
    mapping = {}
    for label in raw_labels:
        mapping.setdefault(label, len(mapping))
    return np.asarray([mapping[label] for label in raw_labels], dtype=np.int64)


def split_indices(n: int, test_fraction: float, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Индексы обучающей и тестовой частей"""
    if not 0.0 < test_fraction < 1.0:
        raise InvalidArgumentError(f"test_fraction должен лежать в (0, 1), получено {test_fraction}")
    if n <= 0:
        raise EmptyDatasetError("Нельзя разбить пустой набор данных")
    n_test = int(round(n * test_fraction))
    order = np.random.default_rng(seed).permutation(n)
    return order[n_test:], order[:n_test]


def train_test_split(ds: Dataset, test_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Детерминированное разбиение; обе части наследуют n_classes и feature_bounds"""
    train_idx, test_idx = split_indices(ds.n_samples, test_fraction, seed)
    return ds.subset(train_idx), ds.subset(test_idx)


def bounding_box(ds: Dataset) -> np.ndarray:
    """Покоординатные (min, max) признаков набора"""
    X = ds.dense_X()
    return np.column_stack([X.min(axis=0), X.max(axis=0)])

