"""
Параллельная обработка образцов с сохранением порядка результатов
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from errors import InvalidArgumentError, ParallelTaskError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(items: Sequence[T], worker: Callable[[T], R], workers: int = 1,
                 keys: Optional[Sequence[int]] = None) -> List[R]:
    """
    Применение worker к каждому элементу; результат i соответствует items[i].
    Ошибка обработчика прерывает запуск и поднимается как ParallelTaskError
    с индексом первого упавшего элемента (keys[i], если keys заданы).
    """
    if workers < 1:
        raise InvalidArgumentError("workers должно быть положительным")
    items = list(items)
    if keys is not None and len(keys) != len(items):
        raise InvalidArgumentError(f"keys: ожидается {len(items)} индексов, получено {len(keys)}")

    def failure(position: int, error: Exception) -> ParallelTaskError:
        return ParallelTaskError(position if keys is None else int(keys[position]), error)

    if workers == 1 or len(items) <= 1:
        results = []
        for index, item in enumerate(items):
            try:
                results.append(worker(item))
            except Exception as e:
                raise failure(index, e) from e
        return results

    logger.debug(f"parallel_map: {len(items)} задач, {workers} потоков")
    executor = ThreadPoolExecutor(max_workers=workers)
    try:
        futures = [executor.submit(worker, item) for item in items]
        results = []
        for index, future in enumerate(futures):
            try:
                results.append(future.result())
            except Exception as e:
                raise failure(index, e) from e
        return results
    finally:
        executor.shutdown(wait=True, cancel_futures=True)


def make_mapper(workers: int, keys: Optional[Sequence[int]] = None):
    """Адаптер под сигнатуру mapper(worker, items) из attacks.seceval"""

    def mapper(worker, items):
        return parallel_map(items, worker, workers, keys=keys)

    return mapper
