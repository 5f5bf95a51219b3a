"""Landslide catalog parsing, filtering and serialization.

Rows are ';'-separated. Numbers accept '.' or ',' as decimal separator and
dates accept MM/DD/YYYY, DD/MM/YYYY and ISO YYYY-MM-DD.
"""
import re
from datetime import date
from typing import Iterable, List, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from ..exceptions import CatalogError, CatalogIssue
from ..models import CatalogEntry, SizeClass
from ..utils.logging import get_logger

DELIMITER = ";"
COLUMNS = (
    "location", "date", "size", "type", "lat", "lon",
    "accuracy_km", "rain_mm", "humidity_pct", "cloud_pct",
)
REQUIRED_COLUMNS = 6

_ISO_DATE = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")
_SLASH_DATE = re.compile(r"^(\d{1,2})[/.](\d{1,2})[/.](\d{4})$")


def parse_number(text: str) -> float:
    """Parse a decimal number written with either '.' or ',' as separator"""
    token = text.strip()
    if token.count(",") == 1 and "." not in token:
        token = token.replace(",", ".")
    return float(token)


def parse_date(text: str) -> date:
    """Parse ISO, MM/DD/YYYY or DD/MM/YYYY dates.

    A component greater than 12 fixes the convention; fully ambiguous
    dates are read month-first.
    """
    token = text.strip()
    iso = _ISO_DATE.match(token)
    if iso:
        year, month, day = (int(g) for g in iso.groups())
        return date(year, month, day)
    slash = _SLASH_DATE.match(token)
    if not slash:
        raise ValueError(f"unrecognized date {text!r}")
    first, second, year = (int(g) for g in slash.groups())
    if first > 12:
        return date(year, second, first)
    return date(year, first, second)


def _optional_number(text: str) -> Optional[float]:
    return parse_number(text) if text.strip() else None


class CatalogParser:
    """Parses catalog text, collecting row issues and warnings with line numbers"""

    def __init__(self, strict: bool = True):
        self.strict = strict
        self.issues: List[CatalogIssue] = []
        self.warnings: List[CatalogIssue] = []

    def parse(self, text: str) -> List[CatalogEntry]:
        lines = [(number, line) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]
        if not lines:
            raise CatalogError("catalog is empty")
        header_line, header = lines[0]
        columns = [c.strip().lower() for c in header.split(DELIMITER)]
        if tuple(columns[:REQUIRED_COLUMNS]) != COLUMNS[:REQUIRED_COLUMNS]:
            raise CatalogError(f"line {header_line}: missing header row, expected {DELIMITER.join(COLUMNS)}")

        entries: List[CatalogEntry] = []
        for number, line in lines[1:]:
            entry = self._parse_row(number, line)
            if entry is not None:
                entries.append(entry)

        logger = get_logger()
        for warning in self.warnings:
            logger.warning(f"catalog {warning}")
        if self.issues:
            if self.strict:
                raise CatalogError(f"{len(self.issues)} invalid catalog rows", self.issues)
            for issue in self.issues:
                logger.warning(f"skipping catalog row, {issue}")
        return entries

    def _parse_row(self, number: int, line: str) -> Optional[CatalogEntry]:
        fields = [f.strip() for f in line.split(DELIMITER)]
        if len(fields) < REQUIRED_COLUMNS or len(fields) > len(COLUMNS):
            self.issues.append(CatalogIssue(number, f"expected {REQUIRED_COLUMNS}-{len(COLUMNS)} fields, got {len(fields)}"))
            return None
        fields += [""] * (len(COLUMNS) - len(fields))
        location, when, size, kind, lat, lon, accuracy, rain, humidity, cloud = fields

        values = {}
        for name, raw in (("latitude", lat), ("longitude", lon)):
            try:
                values[name] = parse_number(raw)
            except ValueError:
                self.issues.append(CatalogIssue(number, f"unparseable {name} {raw!r}"))
                return None
        try:
            event_date = parse_date(when)
            size_class = SizeClass.parse(size)
            optional = [_optional_number(v) for v in (accuracy, rain, humidity, cloud)]
        except ValueError as e:
            self.issues.append(CatalogIssue(number, str(e)))
            return None

        try:
            entry = CatalogEntry(
                location_name=location,
                event_date=event_date,
                size_class=size_class,
                event_type=kind,
                latitude=values["latitude"],
                longitude=values["longitude"],
                location_accuracy_km=optional[0],
                rainfall_mm=optional[1],
                humidity_pct=optional[2],
                cloud_cover_pct=optional[3],
            )
        except ValidationError as e:
            reasons = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
            self.issues.append(CatalogIssue(number, reasons))
            return None
        if entry.latitude == entry.longitude:
            self.warnings.append(CatalogIssue(number, f"latitude equals longitude ({entry.latitude}), possible data error"))
        return entry


def parse_catalog(text: str, strict: bool = True) -> List[CatalogEntry]:
    return CatalogParser(strict=strict).parse(text)


def _format_number(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def serialize_catalog(entries: Iterable[CatalogEntry]) -> str:
    """Normalized catalog text: dot decimals, ISO dates, canonical size tokens"""
    lines = [DELIMITER.join(COLUMNS)]
    for entry in entries:
        lines.append(DELIMITER.join([
            entry.location_name,
            entry.event_date.isoformat(),
            entry.size_class.value,
            entry.event_type,
            _format_number(entry.latitude),
            _format_number(entry.longitude),
            _format_number(entry.location_accuracy_km),
            _format_number(entry.rainfall_mm),
            _format_number(entry.humidity_pct),
            _format_number(entry.cloud_cover_pct),
        ]))
    return "\n".join(lines) + "\n"


class FilterCriteria(BaseModel):
    """Catalog selection rules; unset fields do not filter"""
    min_size_class: Optional[SizeClass] = Field(default=None)
    start_date: Optional[date] = Field(default=None)
    end_date: Optional[date] = Field(default=None)
    max_accuracy_km: Optional[float] = Field(default=None, ge=0.0)
    largest_first: bool = Field(default=False, description="Stable sort by size class, largest first")

    @model_validator(mode="after")
    def _window_ordered(self) -> "FilterCriteria":
        if self.start_date and self.end_date and self.start_date > self.end_date:
            raise ValueError(f"date window start {self.start_date} is after end {self.end_date}")
        return self


def filter_catalog(entries: Iterable[CatalogEntry], criteria: Optional[FilterCriteria] = None) -> List[CatalogEntry]:
    """Keep entries meeting every criterion; input order is preserved"""
    criteria = criteria or FilterCriteria()
    kept: List[CatalogEntry] = []
    for entry in entries:
        if criteria.min_size_class and entry.size_class.rank < criteria.min_size_class.rank:
            continue
        if criteria.start_date and entry.event_date < criteria.start_date:
            continue
        if criteria.end_date and entry.event_date > criteria.end_date:
            continue
        if criteria.max_accuracy_km is not None:
            if entry.location_accuracy_km is None or entry.location_accuracy_km > criteria.max_accuracy_km:
                continue
        kept.append(entry)
    if criteria.largest_first:
        kept.sort(key=lambda e: -e.size_class.rank)
    return kept
