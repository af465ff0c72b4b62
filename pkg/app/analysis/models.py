"""Models for aggregate analyses.

- CohortSpec: the year/field/venue/citation-band selection of a cohort
- AnalysisTable: a named main table plus optional sections and provenance

Every table is written as ``<name>.tsv`` (sections as
``<name>.<section>.tsv``) next to a ``<name>.meta.json`` sidecar holding
the config hash, corpus id, snapshot years, row counts and the published
reference values the table can be compared against.
"""

from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import TOOL_VERSION, TableFormat
from app.core.tables import write_json, write_table


class CohortSpec(BaseModel):
    """Selection of papers compared in a cohort analysis.

    The citation band is either absolute (``c_lo``..``c_hi``, inclusive) or
    relative (``center`` +/- ``relative_band``). Bounds apply to C within
    ``window_t`` years of publication.
    """

    year: int = Field(description="First publication year of the cohort")
    year_to: int | None = Field(default=None, description="Last publication year (default: year)")
    field: str | None = Field(default=None, description="Field label; None keeps every field")
    venue: str | None = Field(default=None, description="Venue label; None keeps every venue")
    c_lo: float | None = Field(default=None, ge=0, description="Lowest windowed citation count")
    c_hi: float | None = Field(default=None, ge=0, description="Highest windowed citation count")
    center: float | None = Field(default=None, gt=0, description="Center of a relative band")
    relative_band: float | None = Field(default=None, gt=0, le=1, description="Relative half-width")
    window_t: int = Field(default=5, ge=0, description="Citation window in years")

    @model_validator(mode="after")
    def _resolve_band(self) -> "CohortSpec":
        if self.center is not None and self.relative_band is not None:
            self.c_lo = self.center * (1 - self.relative_band)
            self.c_hi = self.center * (1 + self.relative_band)
        if self.c_lo is not None and self.c_hi is not None and self.c_lo > self.c_hi:
            raise ValueError(f"empty citation band [{self.c_lo}, {self.c_hi}]")
        if self.year_to is not None and self.year_to < self.year:
            raise ValueError(f"year_to {self.year_to} < year {self.year}")
        return self

    @property
    def last_year(self) -> int:
        return self.year_to if self.year_to is not None else self.year

    def in_band(self, c: float) -> bool:
        lo = self.c_lo if self.c_lo is not None else 0
        hi = self.c_hi if self.c_hi is not None else float("inf")
        return lo <= c <= hi


class AnalysisTable(BaseModel):
    """One analysis output with provenance."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    frame: pd.DataFrame
    sections: dict[str, pd.DataFrame] = Field(default_factory=dict)
    metadata: dict[str, Any] = Field(default_factory=dict)

    def with_provenance(
        self, config_hash: str, corpus_id: str, snapshot_years: tuple[int, int] | None
    ) -> "AnalysisTable":
        meta = {
            **self.metadata,
            "config_hash": config_hash,
            "corpus_id": corpus_id,
            "snapshot_years": list(snapshot_years) if snapshot_years else None,
            "tool_version": TOOL_VERSION,
        }
        return self.model_copy(update={"metadata": meta})

    def write(self, output_dir: Path) -> list[Path]:
        """Write the main table, its sections and the metadata sidecar."""
        paths = [write_table(self.frame, output_dir / f"{self.name}.tsv", TableFormat.TSV)]
        for section, frame in sorted(self.sections.items()):
            paths.append(write_table(frame, output_dir / f"{self.name}.{section}.tsv", TableFormat.TSV))
        meta = {
            **self.metadata,
            "name": self.name,
            "row_counts": {
                self.name: len(self.frame),
                **{f"{self.name}.{s}": len(f) for s, f in sorted(self.sections.items())},
            },
        }
        paths.append(write_json(meta, output_dir / f"{self.name}.meta.json"))
        return paths
