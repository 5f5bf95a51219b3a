from argparse import ArgumentParser
from typing import Any, Dict

import numpy as np

from landslide_framework.commands.base import BaseCommand, unit_float
from landslide_framework.data import SENTINEL2_BANDS, load_raster, scene_windows
from landslide_framework.exceptions import CheckpointError
from landslide_framework.model import load_checkpoint
from landslide_framework.models import CommandMetadata, Prediction
from landslide_framework.training.trainer import EVAL_BATCH


class PredictCommand(BaseCommand):
    """Classifies one before/after scene pair with a saved checkpoint.

    Scenes larger than the network tile are cut into a grid of windows and
    the pair is scored by its most landslide-like window.
    """

    metadata = CommandMetadata(
        name="predict",
        description="Predict whether a landslide happened between two LSRS scenes",
        defaults={"threshold": 0.5},
        required=["checkpoint", "before", "after"],
    )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> None:
        parser.add_argument("--checkpoint", metavar="CKPT", help="LSNW checkpoint (required)")
        parser.add_argument("--before", metavar="F", help="pre-event LSRS scene (required)")
        parser.add_argument("--after", metavar="F", help="post-event LSRS scene (required)")
        parser.add_argument("--threshold", type=unit_float, metavar="P",
                            help="decision threshold" + cls.default_help("threshold"))

    def run(self, options: Dict[str, Any]) -> None:
        net = load_checkpoint(options["checkpoint"])
        if net.config.input_bands != len(SENTINEL2_BANDS):
            raise CheckpointError(
                f"checkpoint expects {net.config.input_bands} bands, scenes provide {len(SENTINEL2_BANDS)}"
            )
        before = load_raster(options["before"])
        after = load_raster(options["after"])
        windows = scene_windows(before, after, net.config.tile_size)

        probabilities = []
        for start in range(0, len(windows), EVAL_BATCH):
            batch = np.stack([stack for _, _, stack in windows[start:start + EVAL_BATCH]])
            probabilities.extend(float(p) for p in net.forward(batch).data)
        best = int(np.argmax(probabilities))
        x, y, _ = windows[best]
        self.logger.info("Scored scene windows", windows=len(windows), best_x=x, best_y=y)

        prediction = Prediction(probability=probabilities[best], threshold=options["threshold"])
        self.emit(f"label={prediction.label} p={prediction.probability:.6f}")
        self.emit_timing()
