"""Grounded CCG word learning with a syntactic-semantic overhypothesis."""

from .experiment import ExperimentConfig, run_experiment
from .grammar import Lexicon, parse_all, parse_distribution
from .learner import LearnerConfig, make_state, observe, probe_novel_word
from .scene import DatasetConfig, generate_dataset

__all__ = [
    "DatasetConfig", "ExperimentConfig", "LearnerConfig", "Lexicon", "generate_dataset",
    "make_state", "observe", "parse_all", "parse_distribution", "probe_novel_word",
    "run_experiment",
]
__version__ = "0.1.0"
