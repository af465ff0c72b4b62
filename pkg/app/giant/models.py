"""Models for giant identification.

- VoteSubnetwork: a focal paper's reference subnetwork at one vote budget n
- GiantResult: per-focal-paper outcome, written to the giants table
- ImportanceScore: graded score of one reference (damping hook)
"""

from dataclasses import dataclass, field
from enum import Enum

from pydantic import BaseModel, Field

NO_GIANT = "NONE"

# =============================================================================
# ENUMS
# =============================================================================


class TieBreakDepth(str, Enum):
    """How far tie-breaking went before a single giant was left.

    - DEGREE: unique maximum degree
    - WEIGHT: degree tie, resolved by retained co-citation weight
    - YEAR: degree and weight tie, resolved by older publication year
    - ID: everything tied, resolved by the smaller paper id
    """

    DEGREE = "degree"
    WEIGHT = "weight"
    YEAR = "year"
    ID = "id"


class ResultFlag(str, Enum):
    """Per-paper anomalies recorded instead of raised."""

    NO_RESOLVED_REFS = "no_resolved_refs"
    FEW_RESOLVED_REFS = "few_resolved_refs"
    THRESHOLD_NOT_CROSSED = "threshold_not_crossed"


# =============================================================================
# SUBNETWORK
# =============================================================================


@dataclass(frozen=True)
class VoteSubnetwork:
    """Retained vote edges among a focal paper's references at budget ``n``.

    Edges are undirected pairs ordered by corpus index (older paper first);
    reciprocal votes collapse into one edge. ``n_nodes`` is the N used for the
    average degree, which may leave out never-co-cited references.
    """

    focal_id: str | None
    refs: tuple[str, ...]
    n: int
    edges: tuple[tuple[str, str], ...]
    edge_weights: dict[tuple[str, str], int] = field(default_factory=dict)
    degree: dict[str, int] = field(default_factory=dict)
    n_nodes: int = 0

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def avg_degree(self) -> float:
        """<k_n> = 2E / N (0 for an empty node set)."""
        return 2 * len(self.edges) / self.n_nodes if self.n_nodes else 0.0

    @property
    def percolates(self) -> bool:
        """Strictly above the threshold, decided in integers: 2E > N."""
        return 2 * len(self.edges) > self.n_nodes


# =============================================================================
# RESULTS
# =============================================================================


class GiantResult(BaseModel):
    """Outcome of giant identification for one focal paper."""

    focal_id: str = Field(description="Focal paper id")
    giant_id: str | None = Field(default=None, description="Selected giant, None when no giant")
    stop_n: int = Field(default=1, ge=1, description="Vote budget at which the search stopped")
    percolation_reached: bool = Field(default=False, description="<k_n> > 1 was reached")
    degrees: dict[str, int] = Field(default_factory=dict, description="ref -> k_i at stop_n")
    weights: dict[str, int] = Field(default_factory=dict, description="ref -> w_i at stop_n")
    tie_break_depth: TieBreakDepth | None = Field(default=None, description="Deepest tie-break used")
    n_refs: int = Field(default=0, ge=0, description="Resolved references of the focal paper")
    n_edges: int = Field(default=0, ge=0, description="Retained edges at stop_n")
    ranked_refs: list[str] = Field(
        default_factory=list, description="Top references by importance score (linear damping only)"
    )
    flags: list[ResultFlag] = Field(default_factory=list, description="Recorded anomalies")

    @property
    def has_giant(self) -> bool:
        return self.giant_id is not None

    @property
    def k_max(self) -> int:
        return max(self.degrees.values(), default=0)

    def to_row(self) -> dict[str, object]:
        """Flat row for the giants output table."""
        return {
            "focal_id": self.focal_id,
            "giant_id": self.giant_id or NO_GIANT,
            "stop_n": self.stop_n,
            "percolation_reached": self.percolation_reached,
            "k_max": self.k_max,
            "tie_break_depth": self.tie_break_depth.value if self.tie_break_depth else NO_GIANT,
            "n_refs": self.n_refs,
            "n_edges": self.n_edges,
            "flags": ",".join(f.value for f in self.flags),
            "ranked_refs": ";".join(self.ranked_refs),
        }


class ImportanceScore(BaseModel):
    """s_i = (k_i / k_max) * (w_i / w_{k_i,max}) * f(i) for one reference."""

    ref: str
    s: float = Field(ge=0.0, le=1.0)
    k_i: int = Field(ge=0)
    k_max: int = Field(ge=1)
    w_i: int = Field(ge=0)
    w_ki_max: int = Field(ge=0, description="Largest w among references with the same degree")
    f_value: float = Field(ge=0.0, le=1.0, description="Damping factor")
