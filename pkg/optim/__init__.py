"""Ограниченная оптимизация: допустимые множества, задачи и взаимозаменяемые солверы"""

from optim.constraints import Box, Constraint, Intersection, L2Ball, LinfBall, Masked, ball
from optim.problem import GRADIENT_SOLVERS, Problem, SolverConfig, SolverTrace
from optim.solvers import SOLVERS, solve, solve_pgd, solve_pgd_ls, solve_random_search


def project(c: Constraint, x):
    return c.project(x)


__all__ = [
    "Constraint", "L2Ball", "LinfBall", "Box", "Masked", "Intersection", "ball", "project",
    "Problem", "SolverConfig", "SolverTrace", "GRADIENT_SOLVERS",
    "SOLVERS", "solve", "solve_pgd", "solve_pgd_ls", "solve_random_search",
]
