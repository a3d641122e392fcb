#!/usr/bin/env python3
"""
Тесты атак уклонения: аналитический оракул для линейной модели,
вырожденные бюджеты, смена солвера, атака на патч
"""

import numpy as np
import pytest
from pydantic import ValidationError

from attacks import EvasionSpec, build_constraint, evasion_problem, run_evasion
from errors import InvalidSpecError, NotDifferentiableError
from models import LossSpec, ModelSpec, fit
from optim import SolverConfig
from tensor_core import make_plate_images, plate_mask, train_test_split

PGD_LS = SolverConfig(solver="pgd-ls", max_iter=10)


def hyperplane_distance(model, x):
    """Расстояние до границы решений бинарной линейной модели"""
    w = model.weights[1] - model.weights[0]
    b = model.bias[1] - model.bias[0]
    return abs(w @ x + b) / np.linalg.norm(w)


@pytest.fixture(scope="module")
def linear_blobs(blobs2):
    return fit(ModelSpec(kind="logreg", regularization=0.1), blobs2)


def test_untargeted_attack_flips_exactly_at_hyperplane_distance(blobs2, linear_blobs):
    X = blobs2.dense_X()
    checked = 0
    for x, y in zip(X[:60], blobs2.y[:60]):
        if linear_blobs.predict(x) != y:
            continue
        dist = hyperplane_distance(linear_blobs, x)
        above = run_evasion(linear_blobs, x, y, EvasionSpec(epsilon=1.01 * dist), PGD_LS)
        below = run_evasion(linear_blobs, x, y, EvasionSpec(epsilon=0.95 * dist), PGD_LS)
        assert above.success
        assert not below.success
        assert np.linalg.norm(above.x_adv - x) <= 1.01 * dist + 1e-9
        checked += 1
    assert checked >= 50


def test_zero_budget_keeps_the_point(blobs2, linear_blobs):
    x, y = blobs2.sample(0), int(blobs2.y[0])
    for cfg in (PGD_LS, SolverConfig(solver="pgd"), SolverConfig(solver="random-search", seed=1)):
        result = run_evasion(linear_blobs, x, y, EvasionSpec(epsilon=0.0), cfg)
        np.testing.assert_array_equal(result.x_adv, x)
        assert not result.success
        assert result.initial_label == result.final_label == y


def test_same_problem_runs_with_every_solver(blobs2, linear_blobs):
    x, y = blobs2.sample(3), int(blobs2.y[3])
    spec = EvasionSpec(epsilon=1.0, norm="linf")
    problem = evasion_problem(linear_blobs, x, y, spec)
    assert problem.has_gradient
    for cfg in (SolverConfig(solver="pgd"), PGD_LS, SolverConfig(solver="random-search", seed=0)):
        result = run_evasion(linear_blobs, x, y, spec, cfg)
        assert result.trace.losses[-1] <= result.trace.losses[0]
        assert np.max(np.abs(result.x_adv - x)) <= 1.0 + 1e-9
        assert len(result.per_iteration_scores) == len(result.trace.points)


def test_forest_requires_gradient_free_solver(moons, forest_moons):
    x, y = moons.sample(0), int(moons.y[0])
    spec = EvasionSpec(epsilon=0.5)
    with pytest.raises(NotDifferentiableError):
        run_evasion(forest_moons, x, y, spec, SolverConfig(solver="pgd"))
    result = run_evasion(forest_moons, x, y, spec, SolverConfig(solver="random-search", seed=0, max_iter=20))
    assert not evasion_problem(forest_moons, x, y, spec).has_gradient
    assert np.linalg.norm(result.x_adv - x) <= 0.5 + 1e-9


def test_spec_validation(blobs2, linear_blobs):
    x, y = blobs2.sample(0), int(blobs2.y[0])
    with pytest.raises(ValidationError):
        EvasionSpec()
    with pytest.raises(ValidationError):
        EvasionSpec(epsilon=-1.0)
    with pytest.raises(InvalidSpecError):
        run_evasion(linear_blobs, x, y, EvasionSpec(epsilon=1.0, loss=LossSpec(target_label=y)), PGD_LS)
    with pytest.raises(InvalidSpecError):
        run_evasion(linear_blobs, x, y, EvasionSpec(epsilon=1.0, loss=LossSpec(kind="cw-logit-diff")), PGD_LS)
    with pytest.raises(InvalidSpecError):
        run_evasion(linear_blobs, x, y, EvasionSpec(patch_mask=(True, False, True)), PGD_LS)


def test_input_bounds_are_respected(blobs2, linear_blobs):
    x, y = blobs2.sample(1), int(blobs2.y[1])
    spec = EvasionSpec(epsilon=5.0, input_bounds=(-4.0, 4.0))
    result = run_evasion(linear_blobs, x, y, spec, PGD_LS)
    assert build_constraint(x, spec).contains(result.x_adv)
    assert np.all(result.x_adv >= -4.0) and np.all(result.x_adv <= 4.0)


def test_cw_targeted_attack_matches_brute_force_on_rbf(moons, rbf_moons, rng):
    X = moons.dense_X()
    correct = [i for i in range(moons.n_samples) if moons.y[i] == 0 and rbf_moons.predict(X[i]) == 0]
    # ближайшие к противоположному классу точки: у них граница внутри шара
    others = X[moons.y == 1]
    gaps = [np.min(np.linalg.norm(others - X[i], axis=1)) for i in correct]
    source = [correct[k] for k in np.argsort(gaps)[:10]]

    loss = LossSpec(kind="cw-logit-diff", target_label=1, kappa=0.0)
    cfg = SolverConfig(solver="pgd-ls", max_iter=100)
    found, matched = 0, 0
    for eps in (0.15, 0.3):
        # равномерная выборка в круге радиуса eps
        angles = rng.uniform(0.0, 2 * np.pi, 10_000)
        radii = eps * np.sqrt(rng.uniform(0.0, 1.0, 10_000))
        offsets = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        for i in source:
            brute = bool(np.any(rbf_moons.predict_batch(X[i] + offsets) == 1))
            result = run_evasion(rbf_moons, X[i], 0, EvasionSpec(loss=loss, epsilon=eps), cfg)
            assert np.linalg.norm(result.x_adv - X[i]) <= eps + 1e-9
            if brute:
                found += 1
                matched += result.success
            if result.success:
                scores = rbf_moons.decision_scores(result.x_adv)
                assert scores[1] > scores[0]
    assert found > 0
    assert matched >= 0.9 * found


def test_patch_attack_changes_only_masked_pixels(plates):
    model = fit(ModelSpec(kind="logreg", regularization=0.1), plates)
    mask = plate_mask()
    spec = EvasionSpec(loss=LossSpec(kind="cw-logit-diff", target_label=0), norm="linf",
                       patch_mask=tuple(mask.tolist()), input_bounds=(0.0, 1.0))
    X = plates.dense_X()
    index = int(np.flatnonzero(plates.y != 0)[0])
    result = run_evasion(model, X[index], int(plates.y[index]), spec, SolverConfig(solver="pgd", step_size=1.0))
    np.testing.assert_array_equal(result.x_adv[~mask], X[index][~mask])
    assert result.x_adv.min() >= 0.0 and result.x_adv.max() <= 1.0
    assert result.trace.losses[-1] <= result.trace.losses[0]


@pytest.mark.slow
def test_targeted_attacks_on_plate_images():
    """Целевые CW-атаки на MLP по изображениям 16x16: 50 итераций, 20 образцов"""
    ds = make_plate_images(150, n_classes=3, noise=0.1, seed=0)
    train, test = train_test_split(ds, 0.3, seed=0)
    model = fit(ModelSpec(kind="mlp", hidden_sizes=(16,), epochs=800, learning_rate=0.5, seed=0), train)

    target = 0
    X = test.dense_X()
    candidates = [i for i in range(test.n_samples) if test.y[i] != target][:20]
    loss = LossSpec(kind="cw-logit-diff", target_label=target, kappa=0.0)
    attacks = [
        (EvasionSpec(loss=loss, norm="linf", epsilon=0.3, input_bounds=(0.0, 1.0)),
         SolverConfig(solver="pgd", max_iter=50, step_size=5.0)),
        (EvasionSpec(loss=loss, norm="linf", epsilon=0.3, input_bounds=(0.0, 1.0)),
         SolverConfig(solver="pgd-ls", max_iter=50)),
        (EvasionSpec(loss=loss, norm="linf", patch_mask=tuple(plate_mask().tolist()), input_bounds=(0.0, 1.0)),
         SolverConfig(solver="pgd", max_iter=50, step_size=5.0)),
    ]
    for spec, cfg in attacks:
        results = [run_evasion(model, X[i], int(test.y[i]), spec, cfg) for i in candidates]
        assert np.mean([r.success for r in results]) >= 0.8
        for r in results:
            assert r.trace.losses[-1] <= r.trace.losses[0]
            if r.success:
                final = r.per_iteration_scores[-1]
                assert final[r.true_label] < final[target]
