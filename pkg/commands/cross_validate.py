from argparse import ArgumentParser
from typing import Any, Dict

from landslide_framework.commands.base import BaseCommand, positive_int
from landslide_framework.models import CommandMetadata, LogLevel
from landslide_framework.training import cross_validate, write_metrics_log
from landslide_framework.utils.formatting import display_fold_table
from landslide_framework.utils.training_hooks import create_training_hooks

from .train import TRAINING_DEFAULTS, add_training_arguments, network_config_for


class CrossValidateCommand(BaseCommand):
    """Grouped k-fold cross-validation over the sites of a dataset"""

    metadata = CommandMetadata(
        name="cv",
        description="Cross-validate with folds grouped by site and report per-fold balanced accuracy",
        defaults={**TRAINING_DEFAULTS, "folds": 5},
        required=["data"],
    )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        add_training_arguments(cls, parser)
        parser.add_argument("--folds", type=positive_int, metavar="K", help="number of folds" + cls.default_help("folds"))

    def run(self, options: Dict[str, Any]) -> None:
        cfg = self.train_config(options)
        sites = self.load_pairs(options, cfg)
        first = sites[sorted(sites)[0]]
        result = cross_validate(
            sites,
            cfg,
            network_config=network_config_for(first),
            hooks=create_training_hooks(self.logger),
            jobs=options["jobs"],
            run_id="cv",
            log_level=self.run_config.log_level,
        )
        if options.get("metrics"):
            write_metrics_log(options["metrics"], folds=result.folds)

        for fold in result.folds:
            self.emit(
                f"fold={fold.fold} bal_acc={fold.balanced_accuracy:.6f} "
                f"best={fold.best_balanced_accuracy:.6f} eval_sites={','.join(fold.eval_sites)}"
            )
        self.emit(f"mean={result.mean:.6f}")
        if self.logger.enabled(LogLevel.INFO):
            display_fold_table(result)
        self.emit_timing()
