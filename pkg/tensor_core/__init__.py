"""Массивы, наборы данных и метрики, общие для всех модулей"""

from tensor_core.tensor import Tensor, as_matrix, as_vector, norm
from tensor_core.datasets import (
    Dataset,
    bounding_box,
    load_csv,
    make_blobs,
    make_dataset,
    make_moons,
    make_plate_images,
    plate_mask,
    split_indices,
    train_test_split,
)
from tensor_core.metrics import accuracy

__all__ = [
    "Tensor", "as_matrix", "as_vector", "norm",
    "Dataset", "bounding_box", "load_csv", "make_blobs", "make_dataset", "make_moons",
    "make_plate_images", "plate_mask", "split_indices", "train_test_split",
    "accuracy",
]
