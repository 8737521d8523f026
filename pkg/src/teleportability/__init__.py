"""Teleportation rated by average fidelity, fidelity deviation and the score F - k D."""

from .channels import KrausChannel, NoiseModel
from .metrics import AverageMethod, ScoreRecord, avg_fidelity, fidelity_deviation, k_star, moments, score
from .qmath import QState
from .states import BlochParam, SchmidtParam
from .teleport import ChainSpec

__all__ = [
    "AverageMethod",
    "BlochParam",
    "ChainSpec",
    "KrausChannel",
    "NoiseModel",
    "QState",
    "SchmidtParam",
    "ScoreRecord",
    "avg_fidelity",
    "fidelity_deviation",
    "k_star",
    "moments",
    "score",
]
