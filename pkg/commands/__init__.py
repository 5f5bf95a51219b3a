"""Subcommands of the landslide CLI"""
from .synth import SynthCommand
from .prepare import PrepareCommand
from .train import TrainCommand
from .cross_validate import CrossValidateCommand
from .evaluate import EvaluateCommand
from .predict import PredictCommand

__all__ = [
    'SynthCommand', 'PrepareCommand', 'TrainCommand',
    'CrossValidateCommand', 'EvaluateCommand', 'PredictCommand',
]
