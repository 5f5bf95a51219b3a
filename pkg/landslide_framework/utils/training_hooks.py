from datetime import datetime
from typing import Optional

from ..models import FoldResult, LogLevel, MetricsRecord
from .hooks import TrainingContext, TrainingHooks
from .logging import ConsoleRunLogger, RunLogger


class LoggingTrainingHooks(TrainingHooks):
    """Training hooks that delegate to a logger"""

    def __init__(self, logger: RunLogger):
        self.logger = logger

    def on_fold_start(self, context: TrainingContext) -> None:
        self.logger.info(
            f"Training {'fold ' + str(context.fold) if context.fold is not None else 'model'}",
            train_sites=len(context.train_sites),
            eval_sites=len(context.eval_sites),
            epochs=context.epochs,
            run_id=context.run_id,
        )

    def on_epoch_end(self, context: TrainingContext, record: MetricsRecord) -> None:
        self.logger.debug(
            f"epoch {record.epoch}/{context.epochs}",
            fold=context.fold,
            loss=record.train_loss,
            train_bal_acc=record.train_balanced_accuracy,
            eval_bal_acc=record.eval_balanced_accuracy,
        )

    def on_fold_end(self, context: TrainingContext, result: Optional[FoldResult], error: Optional[Exception] = None) -> None:
        if error:
            self.logger.error(
                f"Training failed{' in fold ' + str(context.fold) if context.fold is not None else ''}",
                error=str(error),
                run_id=context.run_id,
            )
        elif result is not None:
            self.logger.info(
                f"Fold {result.fold} done",
                eval_bal_acc=result.balanced_accuracy,
                best_eval_bal_acc=result.best_balanced_accuracy,
                seconds=(datetime.now() - context.start_time).total_seconds(),
            )


def create_training_hooks(logger: RunLogger) -> TrainingHooks:
    """Create training hooks for a logger"""
    return LoggingTrainingHooks(logger)


def worker_training_hooks(run_id: str, level: LogLevel) -> TrainingHooks:
    """Hooks for a fold running in a worker process, logging at the parent's level"""
    return LoggingTrainingHooks(ConsoleRunLogger(run_id, level=level))
