"""Online Bayesian learning of usage habits from action sequences."""

from .abith import HabitModel, PathPrediction, SnapshotError
from .probcore import AdaptiveFrequencyEstimator, Vocabulary, bayes_posterior, display_db, evidence
from .taskmodel import TaskGraph, extract, to_dot

__all__ = [
    "AdaptiveFrequencyEstimator",
    "HabitModel",
    "PathPrediction",
    "SnapshotError",
    "TaskGraph",
    "Vocabulary",
    "bayes_posterior",
    "display_db",
    "evidence",
    "extract",
    "to_dot",
]

__version__ = "0.1.0"
