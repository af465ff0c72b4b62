"""Per-paper metric row."""

from enum import Enum

from pydantic import BaseModel, Field


class MetricFlag(str, Enum):
    """Why a metric is missing or degenerate for a paper."""

    D_UNDEFINED = "d_undefined"  # no subsequent citer of the paper or its references
    SINGLE_PAPER_DP_COHORT = "single_paper_dp_cohort"
    UNKNOWN_FIELD = "unknown_field"  # excluded from field/year normalization


class MetricRow(BaseModel):
    """Metrics of one corpus paper.

    Undefined values are None and are exported as ``NA``. ``has_giant`` is
    only set for eligible focal papers.
    """

    paper_id: str
    year: int
    field: str
    venue: str | None = None
    M: int | None = Field(default=None, ge=1, description="Team size")
    eligible: bool = False
    has_giant: bool | None = None
    giant_id: str | None = None
    C: int = Field(default=0, ge=0, description="Distinct citing papers")
    C_t: int = Field(default=0, ge=0, description="Citing papers within the window")
    G: int = Field(default=0, ge=0, description="Focal papers naming this paper their giant")
    G_t: int = Field(default=0, ge=0, description="G restricted to focal papers within the window")
    G_noself: int = Field(default=0, ge=0, description="G without self-citing focal papers")
    D: float | None = Field(default=None, ge=-1.0, le=1.0, description="Disruption score")
    n_i: int = 0
    n_j: int = 0
    n_k: int = 0
    DP: float | None = Field(default=None, ge=0.0, le=100.0, description="Same-year disruption percentile")
    C_norm: float | None = None
    G_norm: float | None = None
    flags: list[MetricFlag] = Field(default_factory=list)
