"""
SVG-графики результатов (matplotlib, без интерактивного бэкенда)

Каждая линия получает gid вида series-<имя>, поэтому в SVG ей соответствует
отдельная группа <g id="series-...">. Текст остается текстом (svg.fonttype=none).
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
from matplotlib import pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "advsec"


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"График сохранен: {path}")
    return path


def scaled(values: Sequence[float]) -> np.ndarray:
    """Min-max масштабирование в [0, 1]; постоянный ряд -> нули"""
    values = np.asarray(values, dtype=np.float64)
    span = values.max() - values.min() if values.size else 0.0
    if span == 0:
        return np.zeros_like(values)
    return (values - values.min()) / span


def plot_loss(losses: Sequence[float], path: Path, title: str = "Потеря атаки") -> Path:
    iterations = np.arange(len(losses))
    fig, ax = plt.subplots(figsize=(6, 4))
    fig.suptitle(title)
    (line,) = ax.plot(iterations, losses, marker='o', linestyle='-', color='b', label="потеря")
    line.set_gid("series-loss")
    ax.set_xlabel("итерация")
    ax.set_ylabel("потеря")
    ax.grid()

    twin = ax.twinx()
    (scaled_line,) = twin.plot(iterations, scaled(losses), linestyle='--', color='gray', label="потеря (масштаб.)")
    scaled_line.set_gid("series-scaled-loss")
    twin.set_ylabel("масштабированная потеря")
    ax.legend(handles=[line, scaled_line], loc="upper right")
    return _save(fig, path)


def plot_class_scores(per_iteration_scores: Sequence[np.ndarray], source: int, target: int,
                      path: Path, title: str = "Оценки классов") -> Path:
    """Исходный класс рисуется пунктиром, целевой сплошной линией"""
    scores = np.vstack(per_iteration_scores)
    iterations = np.arange(scores.shape[0])
    fig, ax = plt.subplots(figsize=(6, 4))
    fig.suptitle(title)
    (src,) = ax.plot(iterations, scores[:, source], linestyle='--', color='b', label=f"исходный класс {source}")
    src.set_gid("series-source-class")
    (dst,) = ax.plot(iterations, scores[:, target], linestyle='-', color='r', label=f"целевой класс {target}")
    dst.set_gid("series-target-class")
    ax.set_xlabel("итерация")
    ax.set_ylabel("оценка")
    ax.legend(loc="upper right")
    ax.grid()
    return _save(fig, path)


def plot_security_curve(eps_grid: Sequence[float], accuracy: Sequence[float],
                        confidence_drop: Optional[Sequence[float]], path: Path,
                        title: str = "Кривая защищенности") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    fig.suptitle(title)
    (acc,) = ax.plot(eps_grid, accuracy, marker='o', linestyle='-', color='b', label="точность")
    acc.set_gid("series-accuracy")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("точность")
    ax.set_ylim(-0.05, 1.05)
    ax.grid()
    handles = [acc]
    if confidence_drop is not None:
        twin = ax.twinx()
        (drop,) = twin.plot(eps_grid, confidence_drop, marker='s', linestyle=':', color='r',
                            label="падение уверенности")
        drop.set_gid("series-confidence-drop")
        twin.set_ylabel("среднее падение оценки")
        handles.append(drop)
    ax.legend(handles=handles, loc="upper right")
    return _save(fig, path)


def plot_attribution(scores: Sequence[float], path: Path, title: str = "Атрибуции признаков") -> Path:
    """Столбчатая диаграмма знаковых атрибуций одной коллекцией линий"""
    scores = np.asarray(scores, dtype=np.float64)
    index = np.arange(scores.shape[0])
    fig, ax = plt.subplots(figsize=(min(max(6, 0.15 * scores.shape[0]), 24), 4))
    fig.suptitle(title)
    colors = np.where(scores >= 0, "tab:red", "tab:blue")
    bars = ax.vlines(index, 0.0, scores, colors=colors, linewidth=4, label="атрибуция")
    bars.set_gid("series-attribution")
    ax.axhline(0.0, color='black', linewidth=0.8)
    ax.set_xlabel("признак")
    ax.set_ylabel("вклад")
    ax.grid(axis="y")
    return _save(fig, path)
