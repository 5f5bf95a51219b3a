from argparse import ArgumentParser
from typing import Any, Dict

from landslide_framework.commands.base import BaseCommand, positive_int, unit_float
from landslide_framework.exceptions import CheckpointError
from landslide_framework.model import load_checkpoint
from landslide_framework.models import CommandMetadata, LogLevel
from landslide_framework.training import balanced_accuracy, evaluate
from landslide_framework.utils.formatting import display_confusion


class EvaluateCommand(BaseCommand):
    """Scores a saved checkpoint on every pair of a dataset"""

    metadata = CommandMetadata(
        name="eval",
        description="Evaluate a checkpoint on a dataset and report balanced accuracy",
        defaults={"threshold": 0.5, "tiles_per_site": 4, "max_cloud_fraction": 0.3},
        required=["checkpoint", "data"],
    )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--checkpoint", metavar="CKPT", help="LSNW checkpoint (required)")
        parser.add_argument("--data", metavar="DIR", help="pair store, or a catalog.csv + scenes/ directory (required)")
        parser.add_argument("--threshold", type=unit_float, metavar="P",
                            help="decision threshold" + cls.default_help("threshold"))
        parser.add_argument("--tiles-per-site", type=positive_int, metavar="N",
                            help="pairs per class cut from raw scenes" + cls.default_help("tiles_per_site"))
        parser.add_argument("--max-cloud-fraction", type=unit_float, metavar="F",
                            help="cloud limit for raw scene windows" + cls.default_help("max_cloud_fraction"))

    def run(self, options: Dict[str, Any]) -> None:
        net = load_checkpoint(options["checkpoint"])
        cfg = self.train_config(options, tile_size=net.config.tile_size)
        sites = self.load_pairs(options, cfg)
        pairs = [p for site in sorted(sites) for p in sites[site]]
        sample = pairs[0]
        if (sample.band_count, sample.tile_size) != (net.config.input_bands, net.config.tile_size):
            raise CheckpointError(
                f"checkpoint expects {net.config.input_bands} bands at tile {net.config.tile_size}, "
                f"data has {sample.band_count} bands at tile {sample.tile_size}"
            )

        counts = evaluate(net, pairs, cfg.threshold)
        score = balanced_accuracy(counts)
        self.emit(
            f"pairs={counts.total} tp={counts.tp} fn={counts.fn} tn={counts.tn} fp={counts.fp} bal_acc={score:.6f}"
        )
        if self.logger.enabled(LogLevel.INFO):
            display_confusion(counts, score)
        self.emit_timing()
