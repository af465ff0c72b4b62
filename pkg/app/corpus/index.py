"""In-memory citation corpus index.

The Corpus is built once from validated PaperRecords and is read-only
afterwards, so it can be shared by every worker thread.

Papers get a dense integer index ordered by (year, paper_id). That order
is the tie-break order used everywhere else (older first, then smaller id),
so downstream code can break ties by comparing integers.

Reference handling:
- Dangling references (ids not in the corpus) stay in the listed count used
  by the eligibility threshold but never enter any graph.
- References to papers published after the citing paper, and references of
  a paper to itself, are dropped with a warning.
"""

import hashlib
import logging
import pickle
from collections.abc import Iterable

import numpy as np
from scipy import sparse

from app.core.config import IngestConfig
from app.corpus.schema import UNKNOWN_FIELD, LoadReport, PaperRecord, PubType

logger = logging.getLogger(__name__)


class Corpus:
    """Id-indexed papers with citation transpose, year index and eligibility flags.

    Attributes:
        papers: paper_id -> PaperRecord, in (year, paper_id) order.
        ids: paper ids in index order.
        years: publication year per index (int32 array).
        citing_index: paper_id -> ids of papers citing it (index order).
        year_index: year -> paper ids published that year.
        eligibility_flags: paper_id -> eligible_focal flag.
        citations: CSR matrix, citations[i, j] = 1 iff paper i cites paper j.
        cited_by: CSR transpose of ``citations``.
        report: counts of anomalies met while indexing.
    """

    def __init__(
        self,
        records: Iterable[PaperRecord],
        ingest: IngestConfig | None = None,
        report: LoadReport | None = None,
        source_sha256: str = "",
    ) -> None:
        self.ingest = ingest or IngestConfig()
        self.report = report.model_copy() if report else LoadReport()
        self.source_sha256 = source_sha256

        ordered = sorted(records, key=lambda r: (r.year, r.paper_id))
        self.papers: dict[str, PaperRecord] = {r.paper_id: r for r in ordered}
        if len(self.papers) != len(ordered):
            raise ValueError("paper_id values must be unique")
        self.ids: tuple[str, ...] = tuple(self.papers)
        self.index: dict[str, int] = {pid: i for i, pid in enumerate(self.ids)}
        self.years = np.fromiter((r.year for r in ordered), dtype=np.int32, count=len(ordered))
        self.years.setflags(write=False)

        self.resolved_refs: dict[str, tuple[str, ...]] = {}
        self.listed_ref_count: dict[str, int] = {}
        self.dangling_count = 0
        rows: list[int] = []
        cols: list[int] = []
        future = self_refs = 0

        for i, rec in enumerate(ordered):
            resolved: list[str] = []
            listed = 0
            for ref in rec.references:
                listed += 1
                j = self.index.get(ref)
                if j is None:
                    self.dangling_count += 1
                    continue
                if j == i:
                    self_refs += 1
                    continue
                if self.years[j] > rec.year:
                    future += 1
                    logger.debug(f"Dropping future reference {rec.paper_id} -> {ref}")
                    continue
                resolved.append(ref)
                rows.append(i)
                cols.append(j)
            self.resolved_refs[rec.paper_id] = tuple(resolved)
            self.listed_ref_count[rec.paper_id] = listed

        if self.dangling_count:
            logger.warning(f"{self.dangling_count} dangling references (kept for counts only)")
        if future:
            logger.warning(f"Dropped {future} references to papers published later than the citing paper")
        if self_refs:
            logger.warning(f"Dropped {self_refs} self references")

        n = len(self.ids)
        data = np.ones(len(rows), dtype=np.int32)
        self.citations = sparse.csr_matrix(
            (data, (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
            shape=(n, n),
            dtype=np.int32,
        )
        self.citations.sort_indices()
        self.cited_by = self.citations.T.tocsr()
        self.cited_by.sort_indices()

        self.citing_index: dict[str, list[str]] = {
            pid: [self.ids[k] for k in self._row(self.cited_by, i)] for i, pid in enumerate(self.ids)
        }
        self.year_index: dict[int, list[str]] = {}
        for pid, rec in self.papers.items():
            self.year_index.setdefault(rec.year, []).append(pid)

        eligible_types = {PubType.parse(t) for t in self.ingest.eligible_types}
        self.eligibility_flags: dict[str, bool] = {
            pid: rec.pub_type in eligible_types
            and self.listed_ref_count[pid] >= self.ingest.min_references
            for pid, rec in self.papers.items()
        }

        self.report.papers = n
        self.report.resolved_references = len(rows)
        self.report.dangling_references = self.dangling_count
        self.report.future_references += future
        self.report.self_references += self_refs
        logger.info(
            f"Indexed {n:,} papers, {len(rows):,} resolved references, "
            f"{sum(self.eligibility_flags.values()):,} eligible focal papers"
        )

    # -------------------------------------------------------------------------
    # Lookups
    # -------------------------------------------------------------------------

    @staticmethod
    def _row(matrix: sparse.csr_matrix, i: int) -> np.ndarray:
        return matrix.indices[matrix.indptr[i] : matrix.indptr[i + 1]]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, paper_id: object) -> bool:
        return paper_id in self.index

    def year_of(self, paper_id: str) -> int:
        return self.papers[paper_id].year

    def field_of(self, paper_id: str) -> str:
        return self.papers[paper_id].field or UNKNOWN_FIELD

    def ref_indices(self, i: int) -> np.ndarray:
        """Resolved references of paper ``i`` as sorted integer indices."""
        return self._row(self.citations, i)

    def citer_indices(self, i: int) -> np.ndarray:
        """Papers citing paper ``i`` as sorted integer indices."""
        return self._row(self.cited_by, i)

    @property
    def year_range(self) -> tuple[int, int]:
        if not len(self.ids):
            raise ValueError("corpus is empty")
        return int(self.years[0]), int(self.years[-1])

    def index_span(self, after_year: int | None, up_to_year: int) -> tuple[int, int]:
        """Half-open index range of papers with after_year < year <= up_to_year."""
        lo = 0 if after_year is None else int(np.searchsorted(self.years, after_year, side="right"))
        hi = int(np.searchsorted(self.years, up_to_year, side="right"))
        return lo, max(lo, hi)

    # -------------------------------------------------------------------------
    # Serialization
    # -------------------------------------------------------------------------

    def to_bytes(self) -> bytes:
        """Canonical serialization; identical inputs give identical bytes."""
        state = (
            [rec.model_dump(mode="json") for rec in self.papers.values()],
            self.ingest.model_dump(mode="json"),
            self.report.model_dump(mode="json"),
        )
        return pickle.dumps(state, protocol=5)

    @classmethod
    def from_bytes(cls, payload: bytes, source_sha256: str = "") -> "Corpus":
        records, ingest, report = pickle.loads(payload)
        report_model = LoadReport.model_validate(report)
        # re-indexing recounts these
        report_model.future_references = 0
        report_model.self_references = 0
        return cls(
            (PaperRecord.model_validate(r) for r in records),
            IngestConfig.model_validate(ingest),
            report_model,
            source_sha256=source_sha256,
        )

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


def eligible_focal_papers(corpus: Corpus, year_range: tuple[int, int] | None = None) -> list[str]:
    """Papers that can be focal papers, sorted by (year, paper_id).

    A paper is eligible when its type is article or letter (configurable),
    it lists at least ``min_references`` references, and its year falls in
    ``year_range`` (inclusive). An empty list is a valid result.
    """
    lo, hi = year_range if year_range is not None else corpus.year_range
    return [
        pid
        for pid, rec in corpus.papers.items()
        if lo <= rec.year <= hi and corpus.eligibility_flags[pid]
    ]
