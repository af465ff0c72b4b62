"""Application configuration using pydantic-settings.

This module centralizes all configuration for the pipeline.
Settings are organized into nested groups for clarity:

- paths: Corpus file, cache and output directories
- ingest: Input format, corpus year range and eligibility filters
- cocite: Co-citation snapshot options
- giant: Vote/percolation options and worker count
- metrics: Citation windows, self-citation mode, normalization cohort
- analysis: Binning, matching bands and cohort sizes
- synth: Defaults for the synthetic corpus generator
- observability: Optional Langfuse tracing of pipeline stages

Environment variables use `__` as nested delimiter:
    GIANT__WORKERS=8
    METRICS__WINDOW=10
    PATHS__CACHE_DIR=./custom/cache

Or set them in .env file, or pass a TOML file with `--config`.
"""

import hashlib
import json
import tomllib
from enum import Enum
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

TOOL_VERSION = "0.1.0"

# =============================================================================
# ENUMS
# =============================================================================


class InputFormat(str, Enum):
    """Corpus input file layouts."""

    JSONL = "jsonl"
    TSV = "tsv"


class TableFormat(str, Enum):
    """Layouts of the per-paper output tables."""

    TSV = "tsv"
    JSONL = "jsonl"


class Damping(str, Enum):
    """Damping function used by importance scores.

    - DELTA: 1 for the giant, 0 for every other reference
    - LINEAR: f(i) = 1, graded scores for every reference
    """

    DELTA = "delta"
    LINEAR = "linear"


class SelfCitationMode(str, Enum):
    """Whether the headline giant index keeps self-citing focal papers."""

    INCLUDE = "include"
    EXCLUDE = "exclude"


class GNormCohort(str, Enum):
    """Which papers define the field/year average of the giant index."""

    GIANTS = "giants"  # only papers with G > 0
    ALL = "all"


# =============================================================================
# NESTED SETTINGS MODELS
# =============================================================================
# These are plain Pydantic models (not BaseSettings) that get composed
# into the main Settings class. They provide logical grouping.


class PathSettings(BaseModel):
    """Data directory paths.

    All paths are relative to the project root.
    """

    corpus_file: Path = Field(
        default=Path("data/corpus.jsonl"),
        description="Newline-delimited corpus file (one paper per line)",
    )
    cache_dir: Path = Field(
        default=Path("data/cache"),
        description="Directory for cached corpus indexes and snapshots",
    )
    output_dir: Path = Field(
        default=Path("data/outputs"),
        description="Directory for stage outputs and manifests",
    )
    targets_file: Path | None = Field(
        default=None,
        description="Optional one-id-per-line list of target papers (e.g. prize-winning)",
    )
    table_format: TableFormat = Field(
        default=TableFormat.TSV,
        description="Layout of the giants and metrics tables (analysis tables are always TSV)",
    )


class IngestConfig(BaseModel):
    """Corpus ingestion and eligibility settings."""

    input_format: InputFormat = Field(
        default=InputFormat.JSONL,
        description="Layout of the corpus file",
    )
    year_min: int = Field(default=1900, description="First publication year kept", ge=0)
    year_max: int = Field(default=2100, description="Last publication year kept", ge=0)
    min_references: int = Field(
        default=5,
        description="Minimum listed references for a focal paper (resolved + dangling)",
        ge=1,
    )
    eligible_types: list[str] = Field(
        default_factory=lambda: ["article", "letter"],
        description="Publication types that can be focal papers",
    )

    @model_validator(mode="after")
    def _check_range(self) -> "IngestConfig":
        if self.year_min > self.year_max:
            raise ValueError(f"year_min {self.year_min} > year_max {self.year_max}")
        return self


class CocitationSettings(BaseModel):
    """Co-citation snapshot settings."""

    exclude_own_refs: bool = Field(
        default=True,
        description="Remove the focal paper's own reference pairs from the snapshot it is judged on",
    )
    cache_snapshots: bool = Field(
        default=True,
        description="Persist the base snapshot so repeated runs skip the rebuild",
    )


class GiantSettings(BaseModel):
    """Giant identification settings."""

    damping: Damping = Field(
        default=Damping.DELTA,
        description="Damping function for importance scores",
    )
    count_isolated_in_n: bool = Field(
        default=True,
        description="Count never-co-cited references in N when computing <k_n>",
    )
    workers: int = Field(
        default=1,
        description="Worker threads used per publication year",
        ge=1,
        le=256,
    )
    top_k: int = Field(
        default=3,
        description="References ranked per focal paper under linear damping",
        ge=1,
        le=50,
    )
    year_from: int | None = Field(default=None, description="First focal year (default: corpus min)")
    year_to: int | None = Field(default=None, description="Last focal year (default: corpus max)")


class MetricsSettings(BaseModel):
    """Per-paper metric settings."""

    window: int = Field(
        default=5,
        description="Years after publication counted by windowed metrics (C_t, G_t)",
        ge=0,
        le=100,
    )
    self_citations: SelfCitationMode = Field(
        default=SelfCitationMode.INCLUDE,
        description="Headline G keeps or drops self-citing focal papers",
    )
    g_norm_cohort: GNormCohort = Field(
        default=GNormCohort.GIANTS,
        description="Average G over G>0 papers or over all papers of the field/year",
    )


class AnalysisSettings(BaseModel):
    """Aggregate analysis settings."""

    citation_band: float = Field(
        default=0.2,
        description="Relative citation band for matched cohorts (0.2 = +/-20%)",
        ge=0.0,
        le=1.0,
    )
    bins_per_decade: int = Field(default=10, description="Logarithmic bins per decade", ge=1, le=100)
    min_bin_count: int = Field(
        default=5,
        description="Minimum papers on both sides of a ratio bin",
        ge=1,
    )
    group_fraction: float = Field(
        default=0.1,
        description="Top/bottom fraction used for high-G and low-G groups",
        gt=0.0,
        le=0.5,
    )
    min_cohort: int = Field(default=30, description="Smallest cohort split into groups", ge=2)
    horizon: int = Field(
        default=10,
        description="Years tracked after the citation window in future-impact curves",
        ge=1,
        le=100,
    )
    dp_bin_width: int = Field(default=10, description="Width of disruption percentile bins", ge=1, le=50)


class SynthSettings(BaseModel):
    """Defaults for the synthetic corpus generator and the oracle."""

    oracle_cap: int = Field(
        default=2000,
        description="Largest corpus the brute-force oracle accepts",
        ge=1,
    )


class ObservabilitySettings(BaseModel):
    """Langfuse observability settings.

    When enabled, every pipeline stage and batch driver is traced to
    Langfuse. When disabled (default), everything is a no-op with zero
    overhead.

    Env vars: OBSERVABILITY__ENABLED=true, OBSERVABILITY__LANGFUSE_PUBLIC_KEY=pk-...
    """

    enabled: bool = Field(
        default=False,
        description="Enable Langfuse tracing (requires valid keys)",
    )
    langfuse_public_key: str = Field(default="", description="Langfuse public key (pk-...)")
    langfuse_secret_key: str = Field(default="", description="Langfuse secret key (sk-...)")
    langfuse_base_url: str = Field(
        default="https://us.cloud.langfuse.com",
        description="Langfuse base URL",
    )


# =============================================================================
# MAIN SETTINGS CLASS
# =============================================================================


class Settings(BaseSettings):
    """Pipeline settings loaded from environment variables.

    Nested settings can be overridden with `__` delimiter:
        GIANT__DAMPING=linear
        INGEST__INPUT_FORMAT=tsv
    """

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_nested_delimiter="__",
        extra="ignore",
    )

    app_name: str = Field(default="Giant Lineage", description="Application name")
    debug: bool = Field(default=False, description="Enable debug logging")

    # Nested settings groups
    paths: PathSettings = Field(default_factory=PathSettings)
    ingest: IngestConfig = Field(default_factory=IngestConfig)
    cocite: CocitationSettings = Field(default_factory=CocitationSettings)
    giant: GiantSettings = Field(default_factory=GiantSettings)
    metrics: MetricsSettings = Field(default_factory=MetricsSettings)
    analysis: AnalysisSettings = Field(default_factory=AnalysisSettings)
    synth: SynthSettings = Field(default_factory=SynthSettings)
    observability: ObservabilitySettings = Field(default_factory=ObservabilitySettings)


def load_settings(config_file: Path | None = None, **overrides: Any) -> Settings:
    """Build settings from an optional TOML file plus explicit overrides.

    Values passed explicitly win over the file, the file wins over
    environment variables and defaults.
    """
    data: dict[str, Any] = {}
    if config_file is not None:
        if not config_file.exists():
            raise FileNotFoundError(f"Config file not found: {config_file}")
        with open(config_file, "rb") as f:
            data = tomllib.load(f)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value
    return Settings(**data)


def config_hash(settings: Settings, *sections: str) -> str:
    """Stable short hash of the named settings groups (all groups if none given).

    Paths and observability never change results, so they are left out
    unless named explicitly.
    """
    dump = settings.model_dump(mode="json")
    keys = sections or tuple(
        k for k in dump if k not in {"paths", "observability", "app_name", "debug"}
    )
    payload = json.dumps({k: dump[k] for k in keys}, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


# Singleton instance - import this in other modules
settings = Settings()
