"""
Команды advsec: train, attack, seceval, poison, explain

Каждая команда получает проверенную конфигурацию и RunArtifacts,
пишет результаты в выходную директорию и возвращает сводку для манифеста.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from attacks import run_evasion, run_poisoning, security_evaluation
from cli import plots
from cli.artifacts import RunArtifacts
from cli.config import BlobsData, CsvData, ExperimentConfig, MoonsData, PlatesData, require_block
from cli.parallel import make_mapper, parallel_map
from errors import ConfigError, NotDifferentiableError
from explain import Attribution, influence_many, integrated_gradients, linear_surrogate
from models import Classifier, chain, fit, fit_scaler, load_model, save_model
from optim.problem import SolverConfig
from tensor_core import (
    Dataset,
    accuracy,
    bounding_box,
    load_csv,
    make_blobs,
    make_dataset,
    make_moons,
    make_plate_images,
    train_test_split,
)

logger = logging.getLogger(__name__)

MODEL_FILE = "model.json"


def build_datasets(cfg: ExperimentConfig) -> Tuple[Dataset, Dataset]:
    """Генерация или загрузка данных и детерминированное разбиение по cfg.seed"""
    source = cfg.dataset.source
    if isinstance(source, BlobsData):
        ds = make_blobs(source.n, source.centers, source.spread, source.seed)
    elif isinstance(source, MoonsData):
        ds = make_moons(source.n, source.noise, source.seed)
    elif isinstance(source, PlatesData):
        ds = make_plate_images(source.n, source.n_classes, source.noise, source.seed, source.size)
    elif isinstance(source, CsvData):
        ds = load_csv(source.path, source.label_column)
    else:
        raise ConfigError(f"неизвестный источник данных {source!r}", field="dataset.source")
    train, test = train_test_split(ds, cfg.dataset.test_fraction, cfg.seed)
    logger.info(f"Данные '{source.generator}': обучение {train.n_samples}, тест {test.n_samples}, "
                f"{ds.n_features} признаков, {ds.n_classes} классов")
    return train, test


def obtain_model(cfg: ExperimentConfig, train: Dataset, command: str) -> Classifier:
    """Обучение по model.spec (с масштабированием при scaler=true) или загрузка model.file"""
    block = require_block(cfg, "model", command)
    if block.file is not None:
        model = load_model(block.file)
        logger.info(f"Модель загружена из {block.file}: {model!r}")
        return model
    if not block.scaler:
        return fit(block.spec, train)
    scaler = fit_scaler(train)
    scaled = make_dataset(scaler.transform(train.dense_X()), train.y, train.n_classes)
    return chain(fit(block.spec, scaled), scaler)


def _sample_indices(requested: Optional[List[int]], test: Dataset, field: str) -> List[int]:
    if requested is None:
        return list(range(test.n_samples))
    for index in requested:
        if index >= test.n_samples:
            raise ConfigError(f"индекс образца {index} вне тестового набора ({test.n_samples})", field=field)
    return list(requested)


def _require_gradients(m: Classifier, solver: SolverConfig):
    if solver.needs_gradient and not m.differentiable:
        raise NotDifferentiableError(
            f"солвер '{solver.solver}' требует градиентов, модель '{m.kind}' не дифференцируема; "
            f"используйте random-search"
        )


def _rival_class(scores: np.ndarray, true_label: int) -> int:
    masked = np.array(scores, dtype=np.float64)
    masked[true_label] = -np.inf
    return int(np.argmax(masked))


def _explain_point(m: Classifier, x: np.ndarray, target: int, seed: int) -> Attribution:
    if m.differentiable:
        return integrated_gradients(m, x, target=target)
    return linear_surrogate(m, x, n_samples=1000, kernel_width=1.0, seed=seed, target=target)


def cmd_train(cfg: ExperimentConfig, run: RunArtifacts) -> Dict[str, Any]:
    train, test = build_datasets(cfg)
    if cfg.model is not None and cfg.model.file is not None:
        raise ConfigError("команда train требует model.spec, а не model.file", field="model.file")
    model = obtain_model(cfg, train, "train")

    path = save_model(model, run.path(MODEL_FILE))
    run.register(path)
    summary = {
        "kind": model.kind,
        "train_accuracy": accuracy(train.y, model.predict_batch(train.X)),
        "test_accuracy": accuracy(test.y, model.predict_batch(test.X)) if test.n_samples else None,
        "model_file": MODEL_FILE,
    }
    run.write_json("metrics.json", summary)
    test_text = f"{summary['test_accuracy']:.3f}" if summary["test_accuracy"] is not None else "-"
    print(f"✅ Модель '{model.kind}' обучена: точность train {summary['train_accuracy']:.3f}, test {test_text}")
    return summary


def cmd_attack(cfg: ExperimentConfig, run: RunArtifacts) -> Dict[str, Any]:
    block = require_block(cfg, "attack", "attack")
    train, test = build_datasets(cfg)
    m = obtain_model(cfg, train, "attack")
    _require_gradients(m, block.solver)

    indices = _sample_indices(block.samples, test, "attack.samples")
    if block.samples is None:
        # без явного списка атакуются только верно классифицированные образцы
        correct = m.predict_batch(test.X) == test.y
        indices = [i for i in indices if correct[i]]
    if block.evasion.targeted:
        target = block.evasion.loss.target_label
        skipped = [i for i in indices if int(test.y[i]) == target]
        if skipped:
            logger.warning(f"Пропущено {len(skipped)} образцов, уже принадлежащих целевому классу {target}")
        indices = [i for i in indices if int(test.y[i]) != target]

    X = test.dense_X()
    logger.info(f"Атака '{block.solver.solver}' на {len(indices)} образцов ({cfg.workers} потоков)")

    def worker(index: int):
        return run_evasion(m, X[index], int(test.y[index]), block.evasion, block.solver)

    results = parallel_map(indices, worker, cfg.workers, keys=indices)

    samples = []
    for index, result in zip(indices, results):
        run.write_json(f"traces/sample_{index}.json", result.to_dict())
        run.register(plots.plot_loss(result.trace.losses, run.path(f"plots/sample_{index}_loss.svg"),
                                     title=f"Потеря атаки, образец {index}"))
        target = result.target_label
        if target is None:
            target = _rival_class(result.per_iteration_scores[-1], result.true_label)
        run.register(plots.plot_class_scores(result.per_iteration_scores, result.true_label, target,
                                             run.path(f"plots/sample_{index}_scores.svg"),
                                             title=f"Оценки классов, образец {index}"))
        if block.explain_adversarial:
            attribution = _explain_point(m, result.x_adv, result.final_label, cfg.seed)
            run.register(attribution.write_csv(run.path(f"attributions/sample_{index}_adversarial.csv")))
        samples.append({
            "index": index,
            "success": result.success,
            "initial_label": result.initial_label,
            "final_label": result.final_label,
            "n_iterations": result.trace.n_iterations,
            "stop_reason": result.trace.stop_reason,
        })

    n_success = sum(1 for s in samples if s["success"])
    summary = {"n_success": n_success, "n_total": len(samples), "samples": samples}
    run.write_json("attack_summary.json", summary)
    print(f"✅ Успешных атак: {n_success}/{len(samples)}")
    return {"n_success": n_success, "n_total": len(samples)}


def cmd_seceval(cfg: ExperimentConfig, run: RunArtifacts) -> Dict[str, Any]:
    block = require_block(cfg, "seceval", "seceval")
    train, test = build_datasets(cfg)
    m = obtain_model(cfg, train, "seceval")
    _require_gradients(m, block.solver)

    indices = _sample_indices(block.samples, test, "seceval.samples")
    subset = test.subset(indices) if block.samples is not None else test
    curve = security_evaluation(m, subset, block.evasion, block.eps_grid, block.solver,
                                mapper=make_mapper(cfg.workers, keys=indices))

    run.register(curve.write_csv(run.path("security_curve.csv")))
    run.write_json("security_curve.json", curve.to_dict())
    run.register(plots.plot_security_curve(curve.eps_grid, curve.accuracy_at_eps, curve.mean_confidence_drop,
                                           run.path("plots/security_curve.svg")))
    for eps, acc in zip(curve.eps_grid, curve.accuracy_at_eps):
        print(f"   eps={eps:g}: точность {acc:.3f}")
    print(f"✅ Кривая защищенности: {len(curve.eps_grid)} точек, {subset.n_samples} образцов")
    if curve.n_unattacked:
        print(f"   ⚠️ Не атаковались {curve.n_unattacked} образцов целевого класса")
    return {
        "accuracy_at_eps": curve.accuracy_at_eps.tolist(),
        "n_samples": subset.n_samples,
        "n_unattacked": curve.n_unattacked,
    }


def cmd_poison(cfg: ExperimentConfig, run: RunArtifacts) -> Dict[str, Any]:
    block = require_block(cfg, "poison", "poison")
    train, val = build_datasets(cfg)
    result = run_poisoning(block.spec, train, val)

    header = [f"x{j}" for j in range(train.n_features)] + ["label"]
    rows = [list(map(float, x)) + [int(y)] for x, y in zip(result.poison.dense_X(), result.poison.y)]
    run.write_csv("poison_points.csv", header, rows)
    run.write_json("poisoning.json", result.to_dict())
    for k, trace in enumerate(result.traces):
        run.register(plots.plot_loss([-loss for loss in trace.losses], run.path(f"plots/poison_{k}_val_loss.svg"),
                                     title=f"Валидационная потеря, точка {k}"))

    print(f"✅ Отравление {block.spec.n_poison} точками: точность на валидации "
          f"{result.val_accuracy_before:.3f} -> {result.val_accuracy_after:.3f}")
    return {
        "n_poison": block.spec.n_poison,
        "val_accuracy_before": result.val_accuracy_before,
        "val_accuracy_after": result.val_accuracy_after,
    }


def _influence_outputs(cfg: ExperimentConfig, run: RunArtifacts, train: Dataset, test: Dataset,
                       indices: List[int]) -> Dict[str, Any]:
    model_block = require_block(cfg, "model", "explain")
    if model_block.spec is None or not model_block.spec.convex:
        raise ConfigError("функции влияния требуют model.spec гладкой выпуклой модели", field="model.spec")
    if model_block.scaler:
        raise ConfigError("функции влияния не поддерживают scaler", field="model.scaler")

    results = influence_many(model_block.spec, train, test.subset(indices))
    top = {}
    for index, result in zip(indices, results):
        run.write_json(f"influence/sample_{index}.json", result.to_dict())
        run.write_csv(f"influence/sample_{index}.csv", ("train_index", "score"),
                      enumerate(map(float, result.per_training_point)))
        run.register(plots.plot_attribution(result.per_training_point, run.path(f"plots/sample_{index}_influence.svg"),
                                            title=f"Влияние обучающих точек, образец {index}"))
        top[str(index)] = result.ranking()[:5].tolist()
    return {"top_harmful": top}


def cmd_explain(cfg: ExperimentConfig, run: RunArtifacts) -> Dict[str, Any]:
    block = require_block(cfg, "explain", "explain")
    train, test = build_datasets(cfg)
    indices = _sample_indices(block.samples, test, "explain.samples")

    if block.method == "influence":
        summary = _influence_outputs(cfg, run, train, test, indices)
        print(f"✅ Влияние рассчитано для {len(indices)} образцов")
        return {"method": block.method, "n_samples": len(indices), **summary}

    m = obtain_model(cfg, train, "explain")
    X = test.dense_X()
    spans = np.diff(bounding_box(train), axis=1).ravel()
    spans[spans == 0] = 1.0

    explainer: Callable[[int], Attribution]
    if block.method == "integrated-gradients":
        def explainer(index: int) -> Attribution:
            return integrated_gradients(m, X[index], baseline=block.baseline, target=block.target,
                                        m_steps=block.m_steps)
    else:
        def explainer(index: int) -> Attribution:
            return linear_surrogate(m, X[index], block.n_samples, block.kernel_width, block.seed,
                                    target=block.target, feature_range=spans)

    attributions = parallel_map(indices, explainer, cfg.workers)
    for index, attribution in zip(indices, attributions):
        stem = f"sample_{index}_{block.method}"
        run.register(attribution.write_csv(run.path(f"attributions/{stem}.csv")))
        run.write_json(f"attributions/{stem}.json", attribution.to_dict())
        run.register(plots.plot_attribution(attribution.per_feature, run.path(f"plots/{stem}.svg"),
                                            title=f"Атрибуции ({block.method}), образец {index}"))

    print(f"✅ Объяснения '{block.method}' для {len(indices)} образцов")
    return {"method": block.method, "n_samples": len(indices)}


COMMANDS: Dict[str, Callable[[ExperimentConfig, RunArtifacts], Dict[str, Any]]] = {
    "train": cmd_train,
    "attack": cmd_attack,
    "seceval": cmd_seceval,
    "poison": cmd_poison,
    "explain": cmd_explain,
}
