"""Landslide Framework - bitemporal landslide detection with a from-scratch 3D-CNN"""

from .config import RunConfiguration, TrainConfig
from .exceptions import DataError, LandslideError, NumericalAbortError
from .model import Network, NetworkConfig, build_network
from .models import CatalogEntry, LogLevel, Prediction

__version__ = "0.1.0"

__all__ = [
    'RunConfiguration', 'TrainConfig',
    'DataError', 'LandslideError', 'NumericalAbortError',
    'Network', 'NetworkConfig', 'build_network',
    'CatalogEntry', 'LogLevel', 'Prediction',
]
