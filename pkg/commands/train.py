from argparse import ArgumentParser, BooleanOptionalAction
from typing import Any, Dict, List

from landslide_framework.commands.base import BaseCommand, positive_float, positive_int, unit_float
from landslide_framework.data.pairs import TilePair
from landslide_framework.model import NetworkConfig, build_network, save_checkpoint
from landslide_framework.models import CommandMetadata
from landslide_framework.seeding import derive_seed
from landslide_framework.training import train, write_metrics_log
from landslide_framework.utils.training_hooks import create_training_hooks

# Shared by train and cv
TRAINING_DEFAULTS = {
    "epochs": 120,
    "batch_size": 8,
    "learning_rate": 1e-3,
    "augment": True,
    "threshold": 0.5,
    "tile": 64,
    "tiles_per_site": 4,
    "max_cloud_fraction": 0.3,
}


def add_training_arguments(command: type, parser: ArgumentParser) -> None:
    parser.add_argument("--data", metavar="DIR", help="pair store, or a catalog.csv + scenes/ directory (required)")
    parser.add_argument("--epochs", type=positive_int, metavar="E", help="training epochs" + command.default_help("epochs"))
    parser.add_argument("--metrics", metavar="F", help="write the per-epoch metrics log here")
    parser.add_argument("--batch-size", type=positive_int, metavar="B", help="mini-batch size" + command.default_help("batch_size"))
    parser.add_argument("--learning-rate", type=positive_float, metavar="LR",
                        help="Adam step size" + command.default_help("learning_rate"))
    parser.add_argument("--augment", action=BooleanOptionalAction,
                        help="random dihedral transform per sample" + command.default_help("augment"))
    parser.add_argument("--threshold", type=unit_float, metavar="P",
                        help="decision threshold on the probability" + command.default_help("threshold"))
    parser.add_argument("--tile", type=positive_int, metavar="T",
                        help="tile side when preparing raw scenes" + command.default_help("tile"))
    parser.add_argument("--tiles-per-site", type=positive_int, metavar="N",
                        help="pairs per class cut from raw scenes" + command.default_help("tiles_per_site"))
    parser.add_argument("--max-cloud-fraction", type=unit_float, metavar="F",
                        help="cloud limit for raw scene windows" + command.default_help("max_cloud_fraction"))


def network_config_for(pairs: List[TilePair], init_seed: int = 0) -> NetworkConfig:
    """Default layer ledger sized to the data's tiles and bands"""
    return NetworkConfig(tile_size=pairs[0].tile_size, input_bands=pairs[0].band_count, init_seed=init_seed)


class TrainCommand(BaseCommand):
    """Trains one network on every site and saves an LSNW checkpoint"""

    metadata = CommandMetadata(
        name="train",
        description="Train a network on all pairs of a dataset and write a checkpoint",
        defaults=dict(TRAINING_DEFAULTS),
        required=["data", "out"],
    )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        add_training_arguments(cls, parser)
        parser.add_argument("--out", metavar="CKPT", help="checkpoint file (required)")

    def run(self, options: Dict[str, Any]) -> None:
        cfg = self.train_config(options)
        sites = self.load_pairs(options, cfg)
        pairs = [p for site in sorted(sites) for p in sites[site]]
        seed = derive_seed(cfg.master_seed, "train", "init") & 0x7FFFFFFF
        net = build_network(network_config_for(pairs, init_seed=seed))
        self.logger.info(
            "Training on all sites",
            sites=len(sites), pairs=len(pairs), parameters=net.parameter_count, epochs=cfg.epochs,
        )

        net, records = train(net, pairs, [], cfg, hooks=create_training_hooks(self.logger))
        save_checkpoint(net, options["out"])
        if options.get("metrics"):
            write_metrics_log(options["metrics"], records=records)

        final = records[-1]
        self.emit(
            f"epochs={len(records)} train_loss={final.train_loss:.6f} "
            f"train_bal_acc={final.train_balanced_accuracy:.6f} checkpoint={options['out']}"
        )
        self.emit_timing()
