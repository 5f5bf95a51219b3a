from argparse import ArgumentParser
from typing import Any, Dict

from landslide_framework.commands.base import BaseCommand, non_negative_int, positive_int
from landslide_framework.models import CommandMetadata
from landslide_framework.synthetic import generate_dataset


class SynthCommand(BaseCommand):
    """Writes a synthetic dataset with known landslide scars"""

    metadata = CommandMetadata(
        name="synth",
        description="Generate synthetic LSRS scenes with a catalog and a truth sidecar",
        defaults={"positives": 16, "negatives": 16, "size": 64},
        required=["out"],
    )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--positives", type=non_negative_int, metavar="N",
                            help="sites with a landslide" + cls.default_help("positives"))
        parser.add_argument("--negatives", type=non_negative_int, metavar="M",
                            help="sites without one" + cls.default_help("negatives"))
        parser.add_argument("--size", type=positive_int, metavar="S",
                            help="scene side in pixels, even" + cls.default_help("size"))
        parser.add_argument("--out", metavar="DIR", help="output directory (required)")

    def run(self, options: Dict[str, Any]) -> None:
        summary = generate_dataset(
            n_positive=options["positives"],
            n_negative=options["negatives"],
            size=options["size"],
            master_seed=options["seed"],
            out_dir=options["out"],
        )
        self.emit(
            f"sites={len(summary.sites)} positives={len(summary.positive_sites)} "
            f"negatives={len(summary.negative_sites)} scenes={len(summary.scene_files)} out={summary.out_dir}"
        )
        self.emit_timing()
