#!/usr/bin/env python3
"""
Тесты кривых оценки защищенности
"""

import csv
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from attacks import CSV_HEADER, EvasionSpec, check_eps_grid, security_evaluation
from errors import InvalidArgumentError
from models import LossSpec, ModelSpec, fit
from optim import SolverConfig
from tensor_core import accuracy

PGD_LS = SolverConfig(solver="pgd-ls", max_iter=10)
SPEC = EvasionSpec(epsilon=0.0)


def test_zero_budget_gives_clean_accuracy(blobs3, logreg_blobs3):
    curve = security_evaluation(logreg_blobs3, blobs3, SPEC, [0.0], PGD_LS)
    clean = accuracy(blobs3.y, logreg_blobs3.predict_batch(blobs3.X))
    assert curve.accuracy_at_eps.tolist() == [pytest.approx(clean)]
    assert curve.mean_confidence_drop.tolist() == [0.0]


def test_curve_is_non_increasing(blobs3, svm_linear_blobs3):
    grid = [0.0, 0.5, 1.0, 2.0, 4.0]
    curve = security_evaluation(svm_linear_blobs3, blobs3, SPEC, grid, PGD_LS)
    acc = curve.accuracy_at_eps
    assert np.all(np.diff(acc) <= 0)
    assert acc[-1] < acc[0]
    assert curve.eps_grid.tolist() == grid


def test_eps_grid_validation():
    with pytest.raises(InvalidArgumentError):
        check_eps_grid([])
    with pytest.raises(InvalidArgumentError):
        check_eps_grid([0.1, 0.2])
    with pytest.raises(InvalidArgumentError):
        check_eps_grid([0.0, 0.5, 0.5])
    with pytest.raises(InvalidArgumentError):
        check_eps_grid([0.0, np.inf])
    np.testing.assert_array_equal(check_eps_grid([0, 1, 2]), [0.0, 1.0, 2.0])


def test_parallel_mapper_matches_sequential(blobs3, logreg_blobs3):
    grid = [0.0, 1.0, 2.0]

    def threaded(worker, items):
        with ThreadPoolExecutor(max_workers=4) as pool:
            return list(pool.map(worker, items))

    sequential = security_evaluation(logreg_blobs3, blobs3, SPEC, grid, PGD_LS)
    parallel = security_evaluation(logreg_blobs3, blobs3, SPEC, grid, PGD_LS, mapper=threaded)
    assert sequential.to_dict() == parallel.to_dict()


def test_curve_csv(tmp_path, blobs3, logreg_blobs3):
    curve = security_evaluation(logreg_blobs3, blobs3, SPEC, [0.0, 1.0], PGD_LS)
    path = curve.write_csv(tmp_path / "curve.csv")
    with open(path, encoding='utf-8') as f:
        rows = list(csv.reader(f))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 3
    assert [float(value) for value in rows[1]] == list(curve.csv_rows()[0])
    assert curve.to_dict()["solver_config"]["solver"] == "pgd-ls"


@pytest.fixture(scope="module")
def logreg_blobs2(blobs2):
    return fit(ModelSpec(kind="logreg", regularization=0.1), blobs2)


def max_hyperplane_distance(model, ds):
    """Наибольшее расстояние до границы среди верно классифицированных образцов"""
    w = model.weights[1] - model.weights[0]
    b = model.bias[1] - model.bias[0]
    X = ds.dense_X()
    correct = model.predict_batch(ds.X) == ds.y
    return float(np.max(np.abs(X[correct] @ w + b)) / np.linalg.norm(w))


def test_linear_curve_reaches_zero_past_largest_margin(blobs2, logreg_blobs2):
    reach = max_hyperplane_distance(logreg_blobs2, blobs2) + 0.01
    grid = np.linspace(0.0, reach, 8)
    curve = security_evaluation(logreg_blobs2, blobs2, SPEC, grid, PGD_LS)
    clean = accuracy(blobs2.y, logreg_blobs2.predict_batch(blobs2.X))
    assert curve.accuracy_at_eps[0] == pytest.approx(clean)
    assert np.all(np.diff(curve.accuracy_at_eps) <= 0)
    assert curve.accuracy_at_eps[-1] == 0.0


def test_white_box_curve_not_above_black_box(blobs2, logreg_blobs2):
    grid = np.linspace(0.0, max_hyperplane_distance(logreg_blobs2, blobs2), 8)
    white = security_evaluation(logreg_blobs2, blobs2, SPEC, grid, PGD_LS)
    black = security_evaluation(logreg_blobs2, blobs2, SPEC, grid,
                                SolverConfig(solver="random-search", max_iter=20, sigma=0.5, seed=0))
    assert np.all(np.diff(black.accuracy_at_eps) <= 0)
    assert np.all(white.accuracy_at_eps <= black.accuracy_at_eps + 0.05)


def test_targeted_curve_leaves_target_class_alone(blobs3, logreg_blobs3):
    spec = EvasionSpec(epsilon=0.0, loss=LossSpec(target_label=0))
    curve = security_evaluation(logreg_blobs3, blobs3, spec, [0.0, 1.0, 3.0], PGD_LS)
    clean = accuracy(blobs3.y, logreg_blobs3.predict_batch(blobs3.X))
    assert curve.n_unattacked == int(np.sum(blobs3.y == 0))
    assert curve.accuracy_at_eps[0] == pytest.approx(clean)
    assert np.all(np.diff(curve.accuracy_at_eps) <= 0)
    # образцы целевого класса не атакуются и остаются в числителе точности
    target_correct = np.mean((logreg_blobs3.predict_batch(blobs3.X) == blobs3.y) & (blobs3.y == 0))
    assert curve.accuracy_at_eps[-1] >= target_correct - 1e-12
    assert curve.to_dict()["n_unattacked"] == curve.n_unattacked
