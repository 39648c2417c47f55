"""Configuration management for cumret."""

import os
from pathlib import Path
from typing import Any, Literal, Optional

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .logging_setup import get_logger

logger = get_logger("config")

DEFAULT_RULES = [
    "SMA",
    "EMA",
    "MOM",
    "KD",
    "MACD",
    "RSI",
    "PSY",
    "CCI",
    "MA",
    "BIAS",
    "ROC",
    "DMI",
    "RND",
]


def _check_rate(value: float) -> float:
    if not 0.0 <= value < 1.0:
        raise ValueError(f"transaction cost rate k must lie in [0, 1), got {value}")
    return value


class IndicatorConfig(BaseModel):
    """Indicator formula variants."""

    alpha_mode: Literal["slow", "conventional"] = "slow"
    dmi_convention: Literal["wilder", "low_rise"] = "wilder"
    zero_mom_threshold: bool = False


class RandomStrategyConfig(BaseModel):
    """Gap distribution of the random strategy (uniform integers, mean 15)."""

    min_gap: int = Field(default=1, ge=1)
    max_gap: int = Field(default=29, ge=1)

    @model_validator(mode="after")
    def validate_gaps(self):
        """Ensure min_gap <= max_gap."""
        if self.min_gap > self.max_gap:
            raise ValueError(
                f"random_strategy.min_gap ({self.min_gap}) must not exceed "
                f"max_gap ({self.max_gap})"
            )
        return self


class BacktestConfig(BaseModel):
    """Single-backtest configuration."""

    k: float = 0.003
    bars_per_year: int = Field(default=252, ge=1)

    @field_validator("k")
    @classmethod
    def validate_k(cls, v):
        return _check_rate(v)


class BootstrapConfig(BaseModel):
    """Resampling harness configuration."""

    M: int = Field(default=1000, ge=1)
    min_window: int = Field(default=260, ge=2)
    k: float = 0.003
    seed: int = Field(default=42, ge=0, lt=2**64)
    rules: list[str] = Field(default_factory=lambda: list(DEFAULT_RULES))
    bars_per_year: int = Field(default=252, ge=1)
    workers: int = Field(default=1, ge=1)

    @field_validator("k")
    @classmethod
    def validate_k(cls, v):
        return _check_rate(v)

    @field_validator("rules")
    @classmethod
    def validate_rules(cls, v):
        unknown = [name for name in v if name.upper() not in DEFAULT_RULES]
        if unknown:
            raise ValueError(f"unknown rule names: {', '.join(unknown)}")
        return [name.upper() for name in v]


class OutputConfig(BaseModel):
    """Artifact output configuration."""

    out_dir: str = "./cumret_out"
    format: Literal["csv", "json"] = "csv"


class LoggingConfig(BaseModel):
    """Logging configuration."""

    console_level: str = "INFO"
    file_level: str = "DEBUG"
    log_dir: Optional[str] = None


def _default_data_dir() -> str:
    return os.environ.get("CUMRET_DATA_DIR", "./data")


class Config(BaseModel):
    """Main configuration class."""

    data_dir: str = Field(default_factory=_default_data_dir)
    seed: int = Field(default=42, ge=0, lt=2**64)
    indicators: IndicatorConfig = Field(default_factory=IndicatorConfig)
    random_strategy: RandomStrategyConfig = Field(default_factory=RandomStrategyConfig)
    backtest: BacktestConfig = Field(default_factory=BacktestConfig)
    bootstrap: BootstrapConfig = Field(default_factory=BootstrapConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @classmethod
    def get_config_path(cls) -> Path:
        """Get the configuration file path."""
        env_path = os.environ.get("CUMRET_CONFIG")
        if env_path:
            return Path(env_path).resolve()
        return Path("./cumret.yaml").resolve()

    def resolve_data_path(self, path: str | Path) -> Path:
        """Resolve a data file, falling back to data_dir for relative names."""
        candidate = Path(path)
        if candidate.exists() or candidate.is_absolute():
            return candidate
        return Path(self.data_dir) / candidate

    def to_dict(self) -> dict[str, Any]:
        """Convert config to dictionary for YAML serialization."""
        return self.model_dump()

    def to_yaml(self) -> str:
        """Convert config to YAML string."""
        return yaml.dump(self.to_dict(), default_flow_style=False, sort_keys=False)

    @classmethod
    def from_yaml_file(cls, config_path: Path) -> "Config":
        """Load configuration from YAML file."""
        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")

        with open(config_path, encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}

        return cls(**data)

    def save_to_yaml_file(self, config_path: Path) -> None:
        """Save configuration to YAML file."""
        config_path.parent.mkdir(parents=True, exist_ok=True)

        with open(config_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_yaml())


class RunConfig(BaseModel):
    """Effective settings of one CLI invocation."""

    command: Literal[
        "ingest",
        "indicators",
        "signals",
        "backtest",
        "bound",
        "bootstrap",
        "sweep-k",
        "sweep-n",
        "reference",
        "synth",
    ]
    data: list[str] = Field(default_factory=list)
    rules: list[str] = Field(default_factory=list)
    k: float = 0.003
    M: Optional[int] = None
    seed: int = Field(default=42, ge=0, lt=2**64)
    out_dir: str = "./cumret_out"
    format: Literal["csv", "json"] = "csv"
    data_sha256: list[str] = Field(default_factory=list)

    @field_validator("k")
    @classmethod
    def validate_k(cls, v):
        return _check_rate(v)

    @model_validator(mode="after")
    def validate_required(self):
        """Commands that read market data need at least one file."""
        needs_data = {"ingest", "indicators", "signals", "backtest", "bootstrap"}
        needs_data |= {"sweep-k", "sweep-n"}
        if self.command in needs_data and not self.data:
            raise ValueError(f"command '{self.command}' requires --data")
        return self

    def metadata(self) -> dict[str, Any]:
        """Artifact metadata header for this run."""
        from .version import ARTIFACT_VERSION

        meta: dict[str, Any] = {
            "command": self.command,
            "seed": self.seed,
            "k": self.k,
            "version": ARTIFACT_VERSION,
        }
        if self.M is not None:
            meta["M"] = self.M
        if self.data_sha256:
            meta["data_sha256"] = "/".join(self.data_sha256)
        return meta


def load_config(config_path: Optional[Path] = None) -> Config:
    """Load configuration from file, or defaults when no file exists."""
    if config_path is None:
        config_path = Config.get_config_path()

    if config_path.exists():
        try:
            return Config.from_yaml_file(config_path)
        except Exception as e:
            # A corrupted config file falls back to defaults
            logger.warning(f"Failed to load config from {config_path}: {e}")
            logger.warning("Using default configuration.")

    return Config()
