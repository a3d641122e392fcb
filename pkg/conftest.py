"""
Общие фикстуры тестов: наборы данных и обученные модели
"""

import numpy as np
import pytest

from models import ModelSpec, fit
from tensor_core import make_blobs, make_moons, make_plate_images


@pytest.fixture(scope="session")
def blobs2():
    """Две хорошо разделенные гауссовы группы в 2D"""
    return make_blobs(100, [[-3.0, 0.0], [3.0, 0.0]], 0.7, seed=0)


@pytest.fixture(scope="session")
def blobs3():
    return make_blobs(90, [[-3.0, 0.0], [3.0, 0.0], [0.0, 4.0]], 0.8, seed=1)


@pytest.fixture(scope="session")
def overlapping_blobs():
    """Перекрывающиеся группы: у модели есть что терять при отравлении"""
    return make_blobs(120, [[-1.0, 0.0], [1.0, 0.0]], 0.8, seed=3)


@pytest.fixture(scope="session")
def moons():
    return make_moons(200, 0.1, seed=0)


@pytest.fixture(scope="session")
def plates():
    return make_plate_images(60, n_classes=3, noise=0.05, seed=0)


@pytest.fixture(scope="session")
def logreg_blobs3(blobs3):
    return fit(ModelSpec(kind="logreg", regularization=0.1), blobs3)


@pytest.fixture(scope="session")
def svm_linear_blobs3(blobs3):
    return fit(ModelSpec(kind="svm-linear", regularization=0.1), blobs3)


@pytest.fixture(scope="session")
def rbf_moons(moons):
    return fit(ModelSpec(kind="svm-rbf", regularization=0.01, gamma=2.0), moons)


@pytest.fixture(scope="session")
def mlp_blobs3(blobs3):
    return fit(ModelSpec(kind="mlp", hidden_sizes=(8,), epochs=300, learning_rate=0.3, seed=2), blobs3)


@pytest.fixture(scope="session")
def forest_moons(moons):
    return fit(ModelSpec(kind="random-forest", n_trees=5, max_depth=3, seed=0), moons)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
