from typing import Iterable

from ..exceptions import ClassBalanceError
from ..models import ConfusionCounts


def confusion_counts(predicted: Iterable[int], actual: Iterable[int]) -> ConfusionCounts:
    counts = ConfusionCounts()
    for p, a in zip(predicted, actual):
        counts.add(int(p), int(a))
    return counts


def balanced_accuracy(c: ConfusionCounts) -> float:
    """Mean of the per-class recalls, (TPR + TNR) / 2"""
    positives, negatives = c.tp + c.fn, c.tn + c.fp
    if positives == 0 or negatives == 0:
        missing = "positive" if positives == 0 else "negative"
        raise ClassBalanceError(f"balanced accuracy is undefined without {missing} examples")
    return (c.tp / positives + c.tn / negatives) / 2.0
