"""
Солверы: PGD с фиксированным шагом, PGD с линейным поиском (PGD-LS) и
безградиентный случайный поиск (1+1)

Все солверы принимают одни и те же Problem и начальную точку, проецируют ее
на допустимое множество и принимают только неухудшающие итерации.
"""

import logging
from typing import Callable, Dict, Tuple

import numpy as np

import config
from errors import InvalidSpecError, NotDifferentiableError, NumericalError
from optim.problem import Problem, SolverConfig, SolverTrace
from tensor_core.tensor import ArrayLike, as_vector

logger = logging.getLogger(__name__)


class _BudgetExhausted(Exception):
    """Исчерпан лимит вызовов целевой функции"""


class _CountingProblem:
    """Обертка над Problem: считает вызовы и проверяет значения на конечность"""

    def __init__(self, problem: Problem, cfg: SolverConfig, trace: SolverTrace):
        self.problem = problem
        self.trace = trace
        self.max_fun_evals = cfg.max_fun_evals

    def value(self, x: np.ndarray) -> float:
        if self.max_fun_evals is not None and self.trace.n_fun_evals >= self.max_fun_evals:
            raise _BudgetExhausted()
        self.trace.n_fun_evals += 1
        value = float(self.problem.objective(x))
        if not np.isfinite(value):
            raise NumericalError(f"Целевая функция не конечна: {value}", iterate=x)
        return value

    def gradient(self, x: np.ndarray) -> np.ndarray:
        self.trace.n_grad_evals += 1
        g = np.asarray(self.problem.gradient(x), dtype=np.float64).ravel()
        if not np.all(np.isfinite(g)):
            raise NumericalError("Градиент содержит NaN или Inf", iterate=x)
        return g

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.problem.constraint.project(x)


def _window_stop(best_history, stop_tol: float) -> bool:
    """Улучшение лучшего значения за последние STOP_WINDOW итераций меньше stop_tol"""
    if len(best_history) <= config.STOP_WINDOW:
        return False
    return best_history[-1 - config.STOP_WINDOW] - best_history[-1] < stop_tol


def _check_solver(cfg: SolverConfig, expected: str, problem: Problem):
    if cfg.solver != expected:
        raise InvalidSpecError(f"Конфигурация для солвера '{cfg.solver}', вызван '{expected}'")
    if cfg.needs_gradient and not problem.has_gradient:
        raise NotDifferentiableError(f"Солвер '{cfg.solver}' требует градиент, у задачи его нет")


def _run(problem: Problem, x0: ArrayLike, cfg: SolverConfig, step: Callable) -> Tuple[np.ndarray, SolverTrace]:
    """Общий цикл: проекция x0, итерации step(), критерии остановки"""

    trace = SolverTrace()
    counted = _CountingProblem(problem, cfg, trace)
    x = counted.project(as_vector(x0))
    fx = counted.value(x)
    trace.record(x, fx)
    best_history = [fx]
    state: Dict = {}

    try:
        for iteration in range(cfg.max_iter):
            x_new, f_new, stop = step(counted, x, fx, state)
            if f_new is not None:
                x, fx = x_new, f_new
                trace.record(x, fx)
                logger.debug(f"{cfg.solver}: итерация {iteration + 1}, f={fx:.6g}")
            if stop:
                trace.stop_reason = "tol-reached"
                break
            best_history.append(fx)
            if _window_stop(best_history, cfg.stop_tol):
                trace.stop_reason = "tol-reached"
                break
    except _BudgetExhausted:
        trace.stop_reason = "budget-exhausted"

    logger.info(
        f"{cfg.solver}: остановка '{trace.stop_reason}', итераций {trace.n_iterations}, "
        f"f={fx:.6g}, вызовов f={trace.n_fun_evals}, градиента={trace.n_grad_evals}"
    )
    return x.copy(), trace


def solve_pgd(problem: Problem, x0: ArrayLike, cfg: SolverConfig) -> Tuple[np.ndarray, SolverTrace]:
    """
    x_{k+1} = P(x_k - eta * g(x_k)); шаг, увеличивающий целевую функцию,
    делится пополам (до PGD_MAX_HALVINGS раз), иначе x_k сохраняется.
    """
    _check_solver(cfg, "pgd", problem)

    def step(counted: _CountingProblem, x, fx, state):
        # в неподвижной точке градиент не пересчитывается
        if state.get("x") is None or not np.array_equal(state["x"], x):
            state["x"], state["g"] = x, counted.gradient(x)
        g = state["g"]
        eta = cfg.step_size
        for _ in range(config.PGD_MAX_HALVINGS + 1):
            candidate = counted.project(x - eta * g)
            if np.array_equal(candidate, x):
                return x, None, True
            f_candidate = counted.value(candidate)
            if f_candidate <= fx:
                return candidate, f_candidate, False
            eta *= 0.5
        return x, None, False

    return _run(problem, x0, cfg, step)


def solve_pgd_ls(problem: Problem, x0: ArrayLike, cfg: SolverConfig) -> Tuple[np.ndarray, SolverTrace]:
    """
    Направление d = -g / ||g||; длина шага: удвоение от ls_min_step, пока
    значение улучшается, затем бисекция между последним улучшающим и первым
    неулучшающим шагом. Не более ls_max_evals вызовов f за итерацию.
    """
    _check_solver(cfg, "pgd-ls", problem)

    def step(counted: _CountingProblem, x, fx, state):
        g = counted.gradient(x)
        g_norm = float(np.linalg.norm(g))
        if g_norm == 0.0:
            return x, None, True
        direction = -g / g_norm

        best_t, best_x, best_f = 0.0, x, fx
        evals = 0
        t = cfg.ls_min_step
        first_bad = None
        while evals < cfg.ls_max_evals:
            z = counted.project(x + t * direction)
            f_z = counted.value(z)
            evals += 1
            if f_z < best_f:
                best_t, best_x, best_f = t, z, f_z
                t *= 2.0
            else:
                first_bad = t
                break

        if best_t == 0.0:
            # ни одна проба не улучшила x_k
            return x, None, True

        lo, hi = best_t, first_bad
        while hi is not None and evals < cfg.ls_max_evals:
            mid = 0.5 * (lo + hi)
            z = counted.project(x + mid * direction)
            f_z = counted.value(z)
            evals += 1
            if f_z < best_f:
                best_x, best_f = z, f_z
                lo = mid
            else:
                hi = mid
        return best_x, best_f, False

    return _run(problem, x0, cfg, step)


def solve_random_search(problem: Problem, x0: ArrayLike, cfg: SolverConfig) -> Tuple[np.ndarray, SolverTrace]:
    """
    (1+1)-поиск: trials гауссовых возмущений масштаба sigma за итерацию;
    лучший кандидат принимается, если строго улучшает x_k. sigma умножается
    на RS_GROW после принятия и на RS_SHRINK иначе.
    """
    _check_solver(cfg, "random-search", problem)
    rng = np.random.default_rng(cfg.seed)

    def step(counted: _CountingProblem, x, fx, state):
        sigma = state.get("sigma", cfg.sigma)
        best_x, best_f = None, fx
        for _ in range(cfg.trials):
            z = counted.project(x + sigma * rng.standard_normal(x.shape[0]))
            f_z = counted.value(z)
            if f_z < best_f:
                best_x, best_f = z, f_z
        if best_x is None:
            state["sigma"] = sigma * config.RS_SHRINK
            return x, None, False
        state["sigma"] = sigma * config.RS_GROW
        return best_x, best_f, False

    return _run(problem, x0, cfg, step)


SOLVERS = {
    "pgd": solve_pgd,
    "pgd-ls": solve_pgd_ls,
    "random-search": solve_random_search,
}


def solve(problem: Problem, x0: ArrayLike, cfg: SolverConfig) -> Tuple[np.ndarray, SolverTrace]:
    """Решение задачи солвером, выбранным в cfg"""
    return SOLVERS[cfg.solver](problem, x0, cfg)
