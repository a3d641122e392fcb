#!/usr/bin/env python3
"""
Тесты объяснений: интегрированные градиенты, локальный суррогат, влияние
обучающих точек против переобучения без точки (leave-one-out)
"""

import numpy as np
import pytest

from errors import KernelWidthError, ShapeError
from explain import influence, influence_many, integrated_gradients, linear_surrogate
from models import LinearModel, LossSpec, ModelSpec, loss_value
from models.training import fit_convex
from tensor_core import make_blobs


def test_integrated_gradients_of_linear_model(blobs3, logreg_blobs3):
    x = blobs3.sample(5)
    baseline = np.array([0.5, -1.0])
    for target in range(3):
        attribution = integrated_gradients(logreg_blobs3, x, baseline=baseline, target=target, m_steps=7)
        expected = logreg_blobs3.weights[target] * (x - baseline)
        np.testing.assert_allclose(attribution.per_feature, expected, rtol=1e-12, atol=1e-12)
        assert attribution.target_class == target


def test_integrated_gradients_vanish_at_baseline(mlp_blobs3):
    x = np.array([1.0, 2.0])
    attribution = integrated_gradients(mlp_blobs3, x, baseline=x.copy(), target=1)
    np.testing.assert_array_equal(attribution.per_feature, [0.0, 0.0])


def test_integrated_gradients_completeness(blobs3, mlp_blobs3):
    baseline = np.zeros(2)
    for i in range(10):
        x = blobs3.sample(i)
        target = mlp_blobs3.predict(x)
        attribution = integrated_gradients(mlp_blobs3, x, target=target, m_steps=200)
        gap = mlp_blobs3.decision_scores(x)[target] - mlp_blobs3.decision_scores(baseline)[target]
        assert attribution.per_feature.sum() == pytest.approx(gap, rel=1e-2, abs=1e-3)


def test_integrated_gradients_default_target_is_prediction(blobs3, logreg_blobs3):
    x = blobs3.sample(0)
    assert integrated_gradients(logreg_blobs3, x).target_class == logreg_blobs3.predict(x)
    with pytest.raises(ShapeError):
        integrated_gradients(logreg_blobs3, x, target=3)


def test_surrogate_of_constant_model_is_flat():
    model = LinearModel(ModelSpec(kind="logreg"), np.zeros((2, 3)), [0.7, -0.2])
    attribution = linear_surrogate(model, [1.0, 2.0, 3.0], n_samples=200, kernel_width=1.0, seed=0, target=0)
    np.testing.assert_allclose(attribution.per_feature, 0.0, atol=1e-10)


def test_surrogate_recovers_linear_weights(logreg_blobs3):
    x = np.array([0.5, 1.0])
    attribution = linear_surrogate(logreg_blobs3, x, n_samples=500, kernel_width=1.0, seed=1, target=2)
    np.testing.assert_allclose(attribution.per_feature, logreg_blobs3.weights[2], rtol=1e-2, atol=1e-2)


def test_surrogate_is_deterministic(blobs3, mlp_blobs3):
    x = blobs3.sample(2)
    first = linear_surrogate(mlp_blobs3, x, n_samples=300, kernel_width=0.5, seed=4)
    second = linear_surrogate(mlp_blobs3, x, n_samples=300, kernel_width=0.5, seed=4)
    np.testing.assert_array_equal(first.per_feature, second.per_feature)


def test_surrogate_rejects_vanishing_kernel(blobs3, mlp_blobs3):
    with pytest.raises(KernelWidthError):
        linear_surrogate(mlp_blobs3, blobs3.sample(0), n_samples=50, kernel_width=1e-6, seed=0)


# --- влияние ---

@pytest.fixture(scope="module")
def small_blobs():
    return make_blobs(30, [[-1.0, 0.0], [1.0, 0.0]], 0.8, seed=11)


def test_influence_tracks_leave_one_out(small_blobs):
    victim = ModelSpec(kind="logreg", regularization=0.1)
    x_test, y_test = np.array([0.2, 0.3]), 0
    result = influence(victim, small_blobs, (x_test, y_test))

    full = fit_convex(victim, small_blobs, tol=1e-10).model
    loss_full = loss_value(full, x_test, y_test, LossSpec())
    deltas = []
    for i in range(small_blobs.n_samples):
        keep = [j for j in range(small_blobs.n_samples) if j != i]
        loo = fit_convex(victim, small_blobs.subset(keep), tol=1e-10).model
        deltas.append(loss_full - loss_value(loo, x_test, y_test, LossSpec()))

    correlation = np.corrcoef(result.per_training_point, deltas)[0, 1]
    assert correlation >= 0.9
    assert result.ranking()[0] == int(np.argmax(result.per_training_point))


def test_zero_gradient_test_point_has_no_influence(blobs2):
    victim = ModelSpec(kind="svm-linear", regularization=0.1)
    # далеко за полосой разделения: квадратичный hinge и его градиент равны нулю
    result = influence(victim, blobs2, (np.array([-20.0, 0.0]), 0))
    np.testing.assert_allclose(result.per_training_point, 0.0, atol=1e-12)


def test_influence_many_matches_single_point_influence(small_blobs):
    victim = ModelSpec(kind="logreg", regularization=0.1)
    test = small_blobs.subset([0, 7, 19])
    batch = influence_many(victim, small_blobs, test)
    assert len(batch) == 3
    for k, result in enumerate(batch):
        single = influence(victim, small_blobs, (test.sample(k), int(test.y[k])))
        np.testing.assert_allclose(result.per_training_point, single.per_training_point, rtol=1e-9, atol=1e-12)
        assert result.test_label == single.test_label
    assert influence_many(victim, small_blobs, small_blobs.subset([])) == []


def test_integrated_gradients_are_linear_in_the_model(blobs3, logreg_blobs3, svm_linear_blobs3):
    a, b = 0.7, -1.3
    spec = ModelSpec(kind="logreg")
    combined = LinearModel(spec, a * logreg_blobs3.weights + b * svm_linear_blobs3.weights,
                           a * logreg_blobs3.bias + b * svm_linear_blobs3.bias)
    x, baseline = blobs3.sample(11), np.array([-0.5, 1.0])
    for target in range(3):
        parts = [integrated_gradients(m, x, baseline=baseline, target=target, m_steps=16).per_feature
                 for m in (logreg_blobs3, svm_linear_blobs3, combined)]
        np.testing.assert_allclose(parts[2], a * parts[0] + b * parts[1], rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("kind", ["logreg", "svm-linear"])
def test_duplicated_training_points_have_equal_influence(kind, small_blobs):
    train = small_blobs.with_points(small_blobs.sample(3)[None, :], [int(small_blobs.y[3])])
    x_test, y_test = small_blobs.sample(10), int(small_blobs.y[10])
    scores = influence(ModelSpec(kind=kind, regularization=0.1), train, (x_test, y_test)).per_training_point
    assert scores.shape == (small_blobs.n_samples + 1,)
    np.testing.assert_allclose(scores[3], scores[-1], rtol=1e-8, atol=1e-14)
