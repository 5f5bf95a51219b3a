"""Per-epoch metrics log.

One ','-separated line per epoch plus a summary line per fold. Accuracies
are computed per tile, which the header comment records.
"""
from pathlib import Path
from typing import List, Optional, Sequence, Union

from ..exceptions import DataError
from ..models import FoldResult, MetricsRecord

HEADER_COMMENT = "# accuracies are per-tile"
HEADER = "epoch,train_loss,train_bal_acc,eval_bal_acc"


def _number(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6f}"


def format_records(records: Sequence[MetricsRecord]) -> List[str]:
    return [
        f"{r.epoch},{_number(r.train_loss)},{_number(r.train_balanced_accuracy)},{_number(r.eval_balanced_accuracy)}"
        for r in records
    ]


def format_summary(result: FoldResult) -> str:
    return (
        f"summary,fold={result.fold},eval_bal_acc={result.balanced_accuracy:.6f},"
        f"best_eval_bal_acc={result.best_balanced_accuracy:.6f}"
    )


def write_metrics_log(
    path: Union[str, Path],
    records: Sequence[MetricsRecord] = (),
    folds: Sequence[FoldResult] = (),
) -> Path:
    """Write plain training records, or every fold's records followed by its summary"""
    lines = [HEADER_COMMENT, HEADER]
    lines.extend(format_records(records))
    for result in folds:
        lines.extend(format_records(result.records))
        lines.append(format_summary(result))
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot write metrics log {path}: {e}") from e
    return path
