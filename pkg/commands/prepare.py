from argparse import ArgumentParser, BooleanOptionalAction
from typing import Any, Dict

from pydantic import ValidationError

from landslide_framework.commands.base import (
    BaseCommand, iso_date, positive_float, positive_int, size_class, unit_float,
)
from landslide_framework.data import FilterCriteria, prepare_dataset
from landslide_framework.exceptions import ConfigurationError
from landslide_framework.models import CommandMetadata


class PrepareCommand(BaseCommand):
    """Cuts labeled tile pairs from catalog + scenes and writes a pair store"""

    metadata = CommandMetadata(
        name="prepare",
        description="Build positive and negative tile pairs from a catalog and per-site scenes",
        defaults={"tile": 64, "tiles_per_site": 4, "max_cloud_fraction": 0.3, "largest_first": False},
        required=["catalog", "scenes", "out"],
    )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--catalog", metavar="F", help="';'-separated landslide catalog (required)")
        parser.add_argument("--scenes", metavar="DIR", help="directory of <site>/*.lsrs scenes (required)")
        parser.add_argument("--tile", type=positive_int, metavar="T", help="tile side in pixels" + cls.default_help("tile"))
        parser.add_argument("--out", metavar="DIR", help="pair store directory (required)")
        parser.add_argument("--tiles-per-site", type=positive_int, metavar="N",
                            help="positive and negative pairs per site" + cls.default_help("tiles_per_site"))
        parser.add_argument("--max-cloud-fraction", type=unit_float, metavar="F",
                            help="reject windows cloudier than this" + cls.default_help("max_cloud_fraction"))
        parser.add_argument("--min-size", type=size_class, metavar="CLASS", help="smallest catalog size class kept")
        parser.add_argument("--start", type=iso_date, metavar="DATE", help="earliest event date kept")
        parser.add_argument("--end", type=iso_date, metavar="DATE", help="latest event date kept")
        parser.add_argument("--max-accuracy-km", type=positive_float, metavar="KM",
                            help="drop entries located less precisely than this")
        parser.add_argument("--largest-first", action=BooleanOptionalAction,
                            help="match sites against the largest events first")

    def run(self, options: Dict[str, Any]) -> None:
        cfg = self.train_config(options)
        try:
            criteria = FilterCriteria(
                min_size_class=options.get("min_size"),
                start_date=options.get("start"),
                end_date=options.get("end"),
                max_accuracy_km=options.get("max_accuracy_km"),
                largest_first=options["largest_first"],
            )
        except ValidationError as e:
            raise ConfigurationError(f"catalog filter: {e.errors()[0]['msg']}") from e

        sites = prepare_dataset(options["catalog"], options["scenes"], cfg, out_dir=options["out"], criteria=criteria)
        pairs = [p for site in sorted(sites) for p in sites[site]]
        positives = sum(p.label for p in pairs)
        self.emit(
            f"sites={len(sites)} pairs={len(pairs)} positives={positives} "
            f"negatives={len(pairs) - positives} tile={cfg.tile_size} out={options['out']}"
        )
        self.emit_timing()
