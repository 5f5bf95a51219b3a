from .cross_validation import cross_validate, plan_folds, run_fold
from .folds import FoldAssignment, kfold_split
from .metrics import balanced_accuracy, confusion_counts
from .metrics_log import write_metrics_log
from .trainer import evaluate, train

__all__ = [
    'cross_validate', 'plan_folds', 'run_fold',
    'FoldAssignment', 'kfold_split',
    'balanced_accuracy', 'confusion_counts',
    'write_metrics_log',
    'evaluate', 'train',
]
