import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, Field, model_validator

from .exceptions import ConfigurationError
from .models import LogLevel


class TrainConfig(BaseModel):
    """Training and cross-validation settings"""
    epochs: int = Field(default=120, ge=1, description="Passes over the balanced training set")
    folds: int = Field(default=5, ge=2, description="Cross-validation folds k")
    batch_size: int = Field(default=8, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    epsilon: float = Field(default=1e-8, gt=0.0)
    augment: bool = Field(default=True, description="One random dihedral transform per sample per epoch")
    tiles_per_site: int = Field(default=4, ge=1, description="Positive and negative pairs cut per site")
    tile_size: int = Field(default=64, gt=0)
    master_seed: int = Field(default=0, ge=0)
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    max_cloud_fraction: float = Field(default=0.3, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_betas(self) -> "TrainConfig":
        if self.beta1 > self.beta2:
            raise ValueError(f"beta1 ({self.beta1}) should not exceed beta2 ({self.beta2})")
        return self

    def adam_hyperparameters(self) -> Dict[str, float]:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
        }


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


@dataclass
class RunConfiguration:
    """Process-level settings shared by every subcommand"""
    log_level: LogLevel = field(default=LogLevel.INFO)
    jobs: int = field(default=1)
    seed: Optional[int] = field(default=None)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_env(cls) -> "RunConfiguration":
        """Read LSW_LOG, LSW_JOBS and LSW_SEED (a .env file is honoured)"""
        load_dotenv()
        try:
            level = LogLevel(os.getenv("LSW_LOG", "info").strip().lower())
        except ValueError:
            level = LogLevel.INFO
        try:
            jobs = int(os.getenv("LSW_JOBS", "1"))
            seed_text = os.getenv("LSW_SEED")
            seed = int(seed_text) if seed_text else None
        except ValueError as e:
            raise ConfigurationError(f"invalid LSW_JOBS/LSW_SEED value: {e}") from e
        return cls(log_level=level, jobs=jobs, seed=seed, metadata={"env": os.getenv("ENVIRONMENT", "development")})

    def with_overrides(self, **overrides: Any) -> "RunConfiguration":
        """Create new config with overridden values"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @staticmethod
    def read_file(path: Union[str, Path]) -> Dict[str, str]:
        """Flat key=value experiment file; keys mirror flag names"""
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"config file {path} not found")
        values = dotenv_values(path)
        options: Dict[str, str] = {}
        for key, value in values.items():
            if value is None:
                raise ConfigurationError(f"{path}: key {key!r} has no value")
            options[normalize_key(key)] = value
        return options
