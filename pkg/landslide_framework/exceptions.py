from typing import List, Optional, Sequence


class LandslideError(Exception):
    """Base class for landslide framework exceptions"""
    pass


class ShapeError(LandslideError):
    """Raised when tensor extents do not agree"""
    pass


class TapeError(LandslideError):
    """Raised when backward cannot run on the given loss/tape"""
    pass


class NonFiniteError(LandslideError):
    """Raised when a parameter receives a non-finite gradient"""
    def __init__(self, parameter: str, detail: str = "non-finite gradient"):
        self.parameter = parameter
        super().__init__(f"{detail} for parameter {parameter}")


class ConfigurationError(LandslideError):
    """Raised when there's a configuration problem"""
    pass


class UsageError(LandslideError):
    """Raised for command-line usage errors"""
    pass


class DataError(LandslideError):
    """Base class for data and validation errors"""
    pass


class CatalogIssue:
    """One catalog row that failed (or warned during) validation"""
    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"

    def __repr__(self) -> str:
        return f"CatalogIssue(line={self.line}, message={self.message!r})"


class CatalogError(DataError):
    """Raised when the catalog is empty or rows fail validation"""
    def __init__(self, message: str, issues: Optional[Sequence[CatalogIssue]] = None):
        self.issues: List[CatalogIssue] = list(issues or [])
        if self.issues:
            message = f"{message}: " + "; ".join(str(i) for i in self.issues)
        super().__init__(message)


class RasterFormatError(DataError):
    """Raised when an LSRS file is malformed"""
    pass


class TruncatedRasterError(RasterFormatError):
    """Raised when an LSRS payload is shorter than its header declares"""
    def __init__(self, path: str, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"{path}: truncated payload, expected {expected} bytes, got {actual}")


class BandError(DataError):
    """Raised when a requested band is missing from a scene"""
    def __init__(self, band: int, available: Sequence[int]):
        self.band = band
        super().__init__(f"band {band} not in scene bands {list(available)}")


class GeometryError(DataError):
    """Raised when tiles, boxes or scenes do not fit together"""
    pass


class CloudCoverError(DataError):
    """Raised when no window passes the cloud-cover threshold"""
    pass


class ClassBalanceError(DataError):
    """Raised when a set lacks one of the two classes"""
    pass


class LeakageError(DataError):
    """Raised when an evaluation site leaks into training"""
    pass


class CheckpointError(DataError):
    """Raised when a checkpoint file is malformed or mismatched"""
    pass


class NumericalAbortError(LandslideError):
    """Raised when training produces a non-finite loss"""
    def __init__(self, epoch: int, batch: int, fold: Optional[int] = None):
        self.epoch = epoch
        self.batch = batch
        self.fold = fold
        where = f"epoch {epoch} batch {batch}"
        if fold is not None:
            where = f"fold {fold} {where}"
        super().__init__(f"non-finite loss at {where}")


class LabelError(DataError):
    """Raised when a label falls outside {0, 1}"""
    pass
