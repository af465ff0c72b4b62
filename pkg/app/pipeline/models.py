"""Models for the staged pipeline.

    START -> ingest -> build_cocite -> giants -> metrics -> analyze -> END

Every node either hands over to the next stage, or ends the graph when the
target stage is done or a stage failed. All state fields have defaults so
nodes can return partial updates.
"""

from enum import Enum, IntEnum

from pydantic import BaseModel, ConfigDict, Field

from app.cocite.snapshot import CoCitationSnapshot
from app.core.config import Settings
from app.corpus.index import Corpus
from app.giant.models import GiantResult
from app.metrics.models import MetricRow


class Stage(str, Enum):
    """Pipeline stages in execution order."""

    INGEST = "ingest"
    BUILD_COCITE = "build_cocite"
    GIANTS = "giants"
    METRICS = "metrics"
    ANALYZE = "analyze"


STAGE_ORDER = list(Stage)

# Bump a stage's version whenever its output semantics change
STAGE_VERSIONS: dict[Stage, int] = {
    Stage.INGEST: 1,
    Stage.BUILD_COCITE: 1,
    Stage.GIANTS: 1,
    Stage.METRICS: 1,
    Stage.ANALYZE: 1,
}

# Settings groups that can change each stage's results
STAGE_SECTIONS: dict[Stage, tuple[str, ...]] = {
    Stage.INGEST: ("ingest",),
    Stage.BUILD_COCITE: ("ingest", "cocite", "giant"),
    Stage.GIANTS: ("ingest", "cocite", "giant"),
    Stage.METRICS: ("ingest", "cocite", "giant", "metrics"),
    Stage.ANALYZE: ("ingest", "cocite", "giant", "metrics", "analysis"),
}


class StageStatus(str, Enum):
    COMPLETE = "complete"
    CACHED = "cached"
    PARTIAL = "partial"


class ExitCode(IntEnum):
    """Process exit codes of the command line."""

    OK = 0
    STAGE_FAILURE = 1
    USAGE = 2
    INPUT = 3
    ORACLE_MISMATCH = 4


class StageManifest(BaseModel):
    """``<stage>.manifest.json`` written next to every stage's outputs."""

    stage: Stage
    stage_version: int
    tool_version: str
    input_hash: str = Field(description="SHA-256 of the corpus file (and targets file, if any)")
    config_hash: str = Field(description="Hash of the settings groups the stage depends on")
    status: StageStatus
    outputs: list[str] = Field(default_factory=list)
    row_counts: dict[str, int] = Field(default_factory=dict)
    analyses: list[str] = Field(
        default_factory=list, description="Analyses requested (analyze stage only)"
    )
    skipped: dict[str, str] = Field(
        default_factory=dict, description="Skipped analyses and why (analyze stage only)"
    )


class PipelineState(BaseModel):
    """State that flows through the pipeline graph."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    # --- Run parameters ---
    settings: Settings
    target: Stage = Field(default=Stage.ANALYZE, description="Last stage to run")
    analyses: list[str] | None = Field(default=None, description="Analysis names (all by default)")
    cocite_year: int | None = Field(
        default=None, description="Snapshot year when build_cocite is the target"
    )
    show_progress: bool = False

    # --- Stage products ---
    corpus: Corpus | None = None
    snapshot: CoCitationSnapshot | None = None
    giant_results: dict[str, GiantResult] = Field(default_factory=dict)
    rows: list[MetricRow] = Field(default_factory=list)
    tables: list[str] = Field(default_factory=list, description="Analyses written")
    skipped: dict[str, str] = Field(default_factory=dict, description="Analyses skipped, with reason")

    # --- Bookkeeping ---
    manifests: dict[str, StageManifest] = Field(default_factory=dict)
    error: str | None = None
    exit_code: ExitCode = ExitCode.OK
