#!/usr/bin/env python3
"""
Тесты атаки отравлением: неявный градиент против конечных разностей
с переобучением, граничные случаи и сквозной запуск
"""

import numpy as np
import pytest
from pydantic import ValidationError

from attacks import PoisoningSpec, poison_gradient, run_poisoning
from errors import InvalidSpecError
from models import ModelSpec
from models.training import fit_convex
from optim import SolverConfig
from tensor_core import accuracy, make_blobs, train_test_split

FIT_TOL = 1e-10


def retrained_val_loss(victim, train, val, xc, yc):
    result = fit_convex(victim, train.with_points(xc[None, :], [yc]), tol=FIT_TOL)
    return result.objective.val_loss(result.theta, result.X, val.dense_X(), val.y)


def fd_poison_gradient(victim, train, val, xc, yc, h=1e-4):
    grad = np.zeros_like(xc)
    for j in range(xc.shape[0]):
        step = np.zeros_like(xc)
        step[j] = h
        grad[j] = (retrained_val_loss(victim, train, val, xc + step, yc)
                   - retrained_val_loss(victim, train, val, xc - step, yc)) / (2 * h)
    return grad


@pytest.fixture(scope="module")
def small_split():
    ds = make_blobs(45, [[-1.0, 0.0], [1.0, 0.5]], 0.9, seed=5)
    return train_test_split(ds, 1 / 3, seed=0)


@pytest.mark.parametrize("victim", [
    ModelSpec(kind="logreg", regularization=0.1),
    ModelSpec(kind="svm-linear", regularization=0.1),
    ModelSpec(kind="svm-rbf", regularization=0.1, gamma=0.5),
])
def test_implicit_gradient_matches_retraining(victim, small_split):
    train, val = small_split
    for xc, yc in (([0.3, -0.2], 1), ([-1.5, 1.0], 0)):
        xc = np.asarray(xc)
        analytic = poison_gradient(victim, train, val, xc, yc)
        numeric = fd_poison_gradient(victim, train, val, xc, yc)
        assert np.linalg.norm(analytic - numeric) <= 1e-2 * max(np.linalg.norm(numeric), 1e-6)


def test_gradient_on_duplicated_training_point(small_split):
    train, val = small_split
    victim = ModelSpec(kind="logreg", regularization=0.1)
    xc, yc = train.sample(0), int(train.y[0])
    analytic = poison_gradient(victim, train, val, xc, yc)
    numeric = fd_poison_gradient(victim, train, val, xc, yc)
    assert np.linalg.norm(analytic - numeric) <= 1e-2 * max(np.linalg.norm(numeric), 1e-6)


def test_heavy_regularization_flattens_the_gradient(small_split):
    train, val = small_split
    victim = ModelSpec(kind="logreg", regularization=1e8)
    grad = poison_gradient(victim, train, val, np.array([0.5, 0.5]), 1)
    assert np.linalg.norm(grad) <= 1e-6


def test_zero_poison_points_keep_accuracy(overlapping_blobs):
    train, val = train_test_split(overlapping_blobs, 0.3, seed=0)
    spec = PoisoningSpec(victim=ModelSpec(kind="logreg"), n_poison=0)
    result = run_poisoning(spec, train, val)
    assert result.val_accuracy_after == result.val_accuracy_before
    assert result.poison.n_samples == 0
    assert result.traces == []


def test_poison_count_is_capped(small_split):
    train, val = small_split
    cap = int(np.floor(0.2 * train.n_samples))
    with pytest.raises(InvalidSpecError):
        run_poisoning(PoisoningSpec(victim=ModelSpec(kind="logreg"), n_poison=cap + 1), train, val)


def test_poisoning_spec_validation(small_split):
    train, val = small_split
    with pytest.raises(ValidationError):
        PoisoningSpec(victim=ModelSpec(kind="mlp"), n_poison=1)
    with pytest.raises(ValidationError):
        PoisoningSpec(victim=ModelSpec(kind="logreg"), n_poison=-1)
    with pytest.raises(InvalidSpecError):
        run_poisoning(PoisoningSpec(victim=ModelSpec(kind="logreg"), n_poison=1, poison_label=5), train, val)
    with pytest.raises(InvalidSpecError):
        run_poisoning(PoisoningSpec(victim=ModelSpec(kind="logreg"), n_poison=1,
                                    feature_box=[(-1.0, 1.0)]), train, val)


def test_poison_points_stay_in_feature_box(small_split):
    train, val = small_split
    box = [(-2.0, 2.0), (-1.0, 1.0)]
    spec = PoisoningSpec(victim=ModelSpec(kind="logreg", regularization=0.1), n_poison=2, poison_label=0,
                         feature_box=box, solver=SolverConfig(solver="pgd-ls", max_iter=5))
    result = run_poisoning(spec, train, val)
    X = result.poison.dense_X()
    assert X.shape == (2, 2)
    assert np.all(X[:, 0] >= -2.0) and np.all(X[:, 0] <= 2.0)
    assert np.all(X[:, 1] >= -1.0) and np.all(X[:, 1] <= 1.0)
    assert result.poison.y.tolist() == [0, 0]
    for trace in result.traces:
        # солвер минимизирует минус валидационную потерю
        assert trace.losses[-1] <= trace.losses[0]


def random_flip_accuracy(victim, train, val, n_poison, trials, seed):
    """Лучшая (наименьшая) точность среди случайных вставок копий с перевернутой меткой"""
    rng = np.random.default_rng(seed)
    X = train.dense_X()
    best = 1.0
    for _ in range(trials):
        idx = rng.choice(train.n_samples, size=n_poison, replace=False)
        flipped = (train.y[idx] + 1) % train.n_classes
        result = fit_convex(victim, train.with_points(X[idx], flipped))
        best = min(best, accuracy(val.y, result.model.predict_batch(val.X)))
    return best


@pytest.mark.slow
def test_optimized_poisoning_beats_random_label_flips():
    ds = make_blobs(86, [[-1.5, 0.0], [1.5, 0.0]], 0.6, seed=3)
    train, val = train_test_split(ds, 26 / 86, seed=0)
    assert train.n_samples == 60
    victim = ModelSpec(kind="logreg", regularization=0.01)
    spec = PoisoningSpec(victim=victim, n_poison=6, solver=SolverConfig(solver="pgd-ls", max_iter=20), seed=0)

    result = run_poisoning(spec, train, val)
    baseline = random_flip_accuracy(victim, train, val, n_poison=6, trials=200, seed=0)
    assert result.val_accuracy_after <= result.val_accuracy_before - 0.05
    assert result.val_accuracy_after <= baseline + 0.02
    X = result.poison.dense_X()
    lo, hi = train.dense_X().min(axis=0), train.dense_X().max(axis=0)
    assert np.all(X >= lo) and np.all(X <= hi)


@pytest.mark.slow
def test_poisoning_degrades_validation_accuracy(overlapping_blobs):
    train, val = train_test_split(overlapping_blobs, 0.3, seed=0)
    spec = PoisoningSpec(victim=ModelSpec(kind="logreg", regularization=0.01), n_poison=5,
                         solver=SolverConfig(solver="pgd-ls", max_iter=20), seed=0)
    result = run_poisoning(spec, train, val)
    assert result.val_accuracy_after <= result.val_accuracy_before
    assert len(result.traces) == 5
