"""Rich tables for human-facing summaries (stderr only)"""
from rich.table import Table

from ..models import ConfusionCounts, CrossValidationResult
from .logging import console


def display_fold_table(result: CrossValidationResult) -> None:
    """Per-fold balanced accuracies with the mean in the footer"""
    table = Table(title="Cross-validation", border_style="cyan", show_footer=True)
    table.add_column("Fold", style="bold cyan", footer="mean")
    table.add_column("Eval sites", style="dim")
    table.add_column("TP/FN/TN/FP")
    table.add_column("Balanced acc.", justify="right", footer=f"{result.mean:.4f}")
    table.add_column("Best", justify="right")
    for fold in result.folds:
        c = fold.counts
        table.add_row(
            str(fold.fold),
            ", ".join(fold.eval_sites),
            f"{c.tp}/{c.fn}/{c.tn}/{c.fp}",
            f"{fold.balanced_accuracy:.4f}",
            f"{fold.best_balanced_accuracy:.4f}",
        )
    console.print(table)


def display_confusion(counts: ConfusionCounts, score: float) -> None:
    table = Table(title=f"Evaluation (balanced accuracy {score:.4f})", border_style="green")
    table.add_column("", style="bold")
    table.add_column("predicted 1", justify="right")
    table.add_column("predicted 0", justify="right")
    table.add_row("actual 1", str(counts.tp), str(counts.fn))
    table.add_row("actual 0", str(counts.fp), str(counts.tn))
    console.print(table)
