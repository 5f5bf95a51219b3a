from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

from ..models import FoldResult, MetricsRecord


@dataclass
class TrainingContext:
    """Context passed to training hooks describing the run being trained"""
    run_id: str = field(metadata={"description": "ID of the command run"})
    fold: Optional[int] = field(default=None, metadata={"description": "Fold index, None outside cross-validation"})
    train_sites: List[str] = field(default_factory=list, metadata={"description": "Sites contributing training pairs"})
    eval_sites: List[str] = field(default_factory=list, metadata={"description": "Held-out sites"})
    epochs: int = field(default=0, metadata={"description": "Planned epoch count"})
    start_time: datetime = field(default_factory=datetime.now, metadata={"description": "When training started"})
    metadata: Dict[str, Any] = field(default_factory=dict, metadata={"description": "Additional run metadata"})


class TrainingHooks(ABC):
    """Hooks for the training lifecycle"""

    @abstractmethod
    def on_fold_start(self, context: TrainingContext) -> None:
        """Called before the first epoch"""
        pass

    @abstractmethod
    def on_epoch_end(self, context: TrainingContext, record: MetricsRecord) -> None:
        """Called after every epoch with its metrics"""
        pass

    @abstractmethod
    def on_fold_end(self, context: TrainingContext, result: Optional[FoldResult], error: Optional[Exception] = None) -> None:
        """Called after evaluation with the fold result or the error that stopped it"""
        pass
