from dataclasses import dataclass, field
from typing import List, Optional

from .models import MetricsRecord


@dataclass
class TrainingState:
    """Mutable progress of one training run"""

    fold: Optional[int] = None
    epoch: int = 0
    batch: int = 0
    records: List[MetricsRecord] = field(default_factory=list)

    def begin_epoch(self, epoch: int) -> None:
        self.epoch = epoch
        self.batch = 0

    def add_record(self, record: MetricsRecord) -> None:
        self.records.append(record)
