"""Классификаторы с аналитическими градиентами по входу, цепочки модулей и потери атак"""

from models.base import Classifier, TrainedModel
from models.chain import MinMaxScaler, ModuleChain, chain, chain_scores_and_gradient, fit_scaler
from models.forest import RandomForestModel
from models.io import load_model, save_model
from models.kernel import KernelSVM
from models.linear import LinearModel
from models.losses import loss_value, loss_value_and_gradient
from models.mlp import MLPModel
from models.specs import CONVEX_KINDS, LossSpec, ModelSpec
from models.training import ConvexFit, fit, fit_convex, make_objective


def decision_scores(m: Classifier, x):
    return m.decision_scores(x)


def predict(m: Classifier, x) -> int:
    return m.predict(x)


def input_gradient(m: Classifier, x, class_idx: int):
    return m.input_gradient(x, class_idx)


__all__ = [
    "Classifier", "TrainedModel", "LinearModel", "KernelSVM", "MLPModel", "RandomForestModel",
    "MinMaxScaler", "ModuleChain", "chain", "chain_scores_and_gradient", "fit_scaler",
    "ModelSpec", "LossSpec", "CONVEX_KINDS",
    "fit", "fit_convex", "make_objective", "ConvexFit",
    "decision_scores", "predict", "input_gradient",
    "loss_value", "loss_value_and_gradient",
    "load_model", "save_model",
]
