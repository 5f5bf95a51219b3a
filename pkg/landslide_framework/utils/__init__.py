from .hooks import TrainingContext, TrainingHooks
from .logging import ConsoleRunLogger, RunLogger, get_logger, set_logger
from .training_hooks import LoggingTrainingHooks, create_training_hooks
from .validation import check_grouping, validate_tile_pair

__all__ = [
    'TrainingContext', 'TrainingHooks',
    'ConsoleRunLogger', 'RunLogger', 'get_logger', 'set_logger',
    'LoggingTrainingHooks', 'create_training_hooks',
    'check_grouping', 'validate_tile_pair',
]
