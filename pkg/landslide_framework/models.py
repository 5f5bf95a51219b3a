from datetime import date
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LogLevel(str, Enum):
    """Controls how much the console logger prints (LSW_LOG)"""
    QUIET = "quiet"   # Only warnings and errors
    INFO = "info"     # Progress per fold and epoch
    DEBUG = "debug"   # Per-batch detail

    @property
    def rank(self) -> int:
        return {"quiet": 0, "info": 1, "debug": 2}[self.value]


class SizeClass(str, Enum):
    """Landslide size classes of the global landslide catalog, smallest first"""
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"
    VERY_LARGE = "very_large"
    CATASTROPHIC = "catastrophic"

    @property
    def rank(self) -> int:
        return list(SizeClass).index(self)

    @classmethod
    def parse(cls, text: str) -> "SizeClass":
        token = text.strip().lower().replace(" ", "_").replace("-", "_")
        return cls(token)


class CatalogEntry(BaseModel):
    """One landslide event row of the catalog"""
    location_name: str = Field(description="Free-text place name")
    event_date: date = Field(description="Calendar date of the event")
    size_class: SizeClass = Field(description="Catalog size class")
    event_type: str = Field(description="landslide, mudslide, debris flow, ...")
    latitude: float = Field(ge=-90.0, le=90.0, description="Decimal degrees")
    longitude: float = Field(ge=-180.0, le=180.0, description="Decimal degrees")
    location_accuracy_km: Optional[float] = Field(default=None, ge=0.0, description="Location accuracy radius")
    rainfall_mm: Optional[float] = Field(default=None, description="Weather metadata, not fed to the network")
    humidity_pct: Optional[float] = Field(default=None, description="Weather metadata, not fed to the network")
    cloud_cover_pct: Optional[float] = Field(default=None, description="Weather metadata, not fed to the network")

    @field_validator("event_date")
    @classmethod
    def _date_in_range(cls, value: date) -> date:
        if not 1900 <= value.year <= 2100:
            raise ValueError(f"event year {value.year} outside [1900, 2100]")
        return value


class PixelRect(BaseModel):
    """Axis-aligned pixel rectangle: columns [x, x+w), rows [y, y+h)"""
    model_config = ConfigDict(frozen=True)

    x: int = Field(ge=0)
    y: int = Field(ge=0)
    w: int = Field(gt=0)
    h: int = Field(gt=0)

    def fits(self, width: int, height: int) -> bool:
        return self.x + self.w <= width and self.y + self.h <= height

    def shifted(self, dx: int, dy: int) -> "PixelRect":
        return PixelRect(x=self.x + dx, y=self.y + dy, w=self.w, h=self.h)


class Prediction(BaseModel):
    """Model output for one tile pair"""
    probability: float = Field(gt=0.0, lt=1.0)
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    label: int = Field(default=0, description="1 iff probability >= threshold")

    @model_validator(mode="after")
    def _apply_threshold(self) -> "Prediction":
        self.label = 1 if self.probability >= self.threshold else 0
        return self


class ConfusionCounts(BaseModel):
    """Per-class counts behind balanced accuracy"""
    tp: int = Field(default=0, ge=0)
    fp: int = Field(default=0, ge=0)
    tn: int = Field(default=0, ge=0)
    fn: int = Field(default=0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def add(self, predicted: int, actual: int) -> None:
        if actual == 1:
            if predicted == 1:
                self.tp += 1
            else:
                self.fn += 1
        elif predicted == 1:
            self.fp += 1
        else:
            self.tn += 1


class MetricsRecord(BaseModel):
    """Per-epoch training metrics"""
    epoch: int = Field(ge=1)
    train_loss: float
    train_balanced_accuracy: float = Field(ge=0.0, le=1.0)
    eval_balanced_accuracy: Optional[float] = Field(default=None, ge=0.0, le=1.0)


class FoldResult(BaseModel):
    """Outcome of one cross-validation fold"""
    fold: int = Field(ge=0)
    train_sites: List[str]
    eval_sites: List[str]
    balanced_accuracy: float = Field(ge=0.0, le=1.0)
    best_balanced_accuracy: float = Field(ge=0.0, le=1.0)
    counts: ConfusionCounts
    records: List[MetricsRecord] = Field(default_factory=list)


class CrossValidationResult(BaseModel):
    """Per-fold scores and their mean"""
    folds: List[FoldResult]

    @property
    def fold_scores(self) -> List[float]:
        return [f.balanced_accuracy for f in self.folds]

    @property
    def mean(self) -> float:
        scores = self.fold_scores
        return sum(scores) / len(scores)


class CommandMetadata(BaseModel):
    """Schema for CLI subcommand metadata"""
    name: str = Field(description="Subcommand name")
    description: str = Field(description="One-line help text")
    defaults: Dict[str, object] = Field(default_factory=dict, description="Built-in option defaults")
    required: List[str] = Field(default_factory=list, description="Options that must come from a flag or the config file")
