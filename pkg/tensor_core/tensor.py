"""
Плотные и разреженные массивы advsec

Tensor хранит либо numpy.ndarray, либо scipy.sparse.csr_matrix
(отсортированные индексы столбцов, без явных нулей). Все значения конечные,
64-битные. После создания Tensor неизменяем.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import scipy.sparse as sp

from errors import InvalidArgumentError, InvalidValueError, ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Union["Tensor", np.ndarray, sp.spmatrix, list, tuple]


def _canonical_csr(matrix: sp.spmatrix) -> sp.csr_matrix:
    """Каноническая CSR-форма: без дубликатов, явных нулей, индексы отсортированы"""
    csr = sp.csr_matrix(matrix, dtype=np.float64, copy=True)
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


@dataclass(frozen=True, eq=False)
class Tensor:
    """Числовой массив с плотным или разреженным (CSR) хранением"""

    data: Union[np.ndarray, sp.csr_matrix]
    shape: Tuple[int, ...]

    def __post_init__(self):
        values = self.data.data if sp.issparse(self.data) else self.data
        if not np.all(np.isfinite(values)):
            raise InvalidValueError("Tensor содержит NaN или Inf")
        if int(np.prod(self.shape, dtype=np.int64)) != self._stored_size():
            raise ShapeError(f"Форма {self.shape} не согласована с хранимыми данными")

    def _stored_size(self) -> int:
        rows, cols = self.data.shape if sp.issparse(self.data) else (self.data.size, 1)
        return int(rows) * int(cols)

    # --- конструкторы ---

    @classmethod
    def dense(cls, values) -> "Tensor":
        array = np.array(values, dtype=np.float64, copy=True)
        array.flags.writeable = False
        return cls(array, tuple(array.shape))

    @classmethod
    def sparse(cls, values) -> "Tensor":
        if isinstance(values, Tensor):
            values = values.data
        if sp.issparse(values):
            shape = tuple(values.shape)
            return cls(_canonical_csr(values), shape)
        array = np.asarray(values, dtype=np.float64)
        if array.ndim > 2:
            raise ShapeError("Разреженное хранение поддерживает не более двух измерений")
        shape = tuple(array.shape)
        return cls(_canonical_csr(np.atleast_2d(array)), shape)

    @classmethod
    def of(cls, values: ArrayLike) -> "Tensor":
        """Tensor из произвольного массива; разреженный вход остается разреженным"""
        if isinstance(values, Tensor):
            return values
        if sp.issparse(values):
            return cls.sparse(values)
        return cls.dense(values)

    # --- свойства ---

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    @property
    def storage(self) -> str:
        return "sparse-compressed-rows" if self.is_sparse else "dense"

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def nnz(self) -> int:
        if self.is_sparse:
            return int(self.data.nnz)
        return int(np.count_nonzero(self.data))

    def to_dense(self) -> np.ndarray:
        """Плотная копия с логической формой"""
        if self.is_sparse:
            return np.asarray(self.data.toarray(), dtype=np.float64).reshape(self.shape)
        return np.array(self.data, dtype=np.float64)

    def to_sparse(self) -> "Tensor":
        return self if self.is_sparse else Tensor.sparse(self.data)

    def row(self, index: int) -> "Tensor":
        if self.ndim != 2:
            raise ShapeError("row() определен только для матриц")
        if self.is_sparse:
            return Tensor(_canonical_csr(self.data[index]), (self.shape[1],))
        return Tensor.dense(self.data[index])

    def take_rows(self, indices) -> "Tensor":
        indices = np.asarray(indices, dtype=np.int64)
        if self.is_sparse:
            block = self.data[indices]
            return Tensor(_canonical_csr(block), (len(indices), self.shape[1]))
        return Tensor.dense(self.data[indices])

    def tolist(self) -> list:
        return self.to_dense().tolist()

    def __len__(self) -> int:
        return self.shape[0]

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, storage={self.storage}, nnz={self.nnz})"


def as_vector(x: ArrayLike, n_features: int = None) -> np.ndarray:
    """Плотный одномерный float64-вектор с проверкой конечности и размерности"""
    if isinstance(x, Tensor):
        vector = x.to_dense().ravel()
    elif sp.issparse(x):
        vector = np.asarray(x.toarray(), dtype=np.float64).ravel()
    else:
        vector = np.array(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(vector)):
        raise InvalidValueError("Вектор содержит NaN или Inf")
    if n_features is not None and vector.shape[0] != n_features:
        raise ShapeError(f"Ожидается {n_features} признаков, получено {vector.shape[0]}")
    return vector


def as_matrix(X: ArrayLike, keep_sparse: bool = True) -> Union[np.ndarray, sp.csr_matrix]:
    """Двумерная матрица: CSR для разреженного входа (если keep_sparse), иначе плотная"""
    if isinstance(X, Tensor):
        if X.is_sparse:
            return X.data if keep_sparse else X.data.toarray()
        return np.atleast_2d(X.to_dense())
    if sp.issparse(X):
        return _canonical_csr(X) if keep_sparse else np.asarray(X.toarray(), dtype=np.float64)
    matrix = np.atleast_2d(np.array(X, dtype=np.float64))
    if not np.all(np.isfinite(matrix)):
        raise InvalidValueError("Матрица содержит NaN или Inf")
    return matrix


def norm(x: ArrayLike, p=2) -> float:
    """l_p-норма вектора, p из {1, 2, inf}"""

    if p in ("inf", "linf", np.inf, float("inf")):
        order = np.inf
    elif p in (1, "l1", 1.0):
        order = 1
    elif p in (2, "l2", 2.0):
        order = 2
    else:
        raise InvalidArgumentError(f"Неподдерживаемый порядок нормы: {p}")

    if isinstance(x, Tensor):
        if x.ndim != 1:
            raise ShapeError("norm() определена только для векторов")
        values = x.data.data if x.is_sparse else x.data
    elif sp.issparse(x):
        values = _canonical_csr(x).data
    else:
        values = np.asarray(x, dtype=np.float64)
        if values.ndim != 1:
            raise ShapeError("norm() определена только для векторов")

    if not np.all(np.isfinite(values)):
        raise InvalidValueError("Вектор содержит NaN или Inf")
    if values.size == 0:
        return 0.0

    magnitudes = np.abs(values)
    if order == np.inf:
        return float(magnitudes.max())
    if order == 1:
        return float(magnitudes.sum())
    # масштабирование защищает от переполнения квадратов
    scale = magnitudes.max()
    if scale == 0.0:
        return 0.0
    scaled = magnitudes / scale
    return float(scale * np.sqrt(np.dot(scaled, scaled)))
