"""Объяснения: интегрированные градиенты, локальный суррогат, функции влияния"""

from explain.attribution import Attribution, integrated_gradients, linear_surrogate
from explain.influence import InfluenceResult, average_influence, influence, influence_many

__all__ = [
    "Attribution", "integrated_gradients", "linear_surrogate",
    "InfluenceResult", "influence", "influence_many", "average_influence",
]
