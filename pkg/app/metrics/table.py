"""Assemble, normalize and export the per-paper metric table."""

import logging
from collections import Counter
from collections.abc import Mapping, Sequence
from pathlib import Path

import pandas as pd

from app.core.config import GNormCohort, MetricsSettings, SelfCitationMode, TableFormat, settings
from app.core.tables import write_table
from app.core.tracing import observe
from app.corpus.index import Corpus
from app.corpus.schema import UNKNOWN_FIELD
from app.giant.models import GiantResult
from app.metrics.counts import citation_counts, giant_index, self_citation_filter
from app.metrics.disruption import disruption_all, disruption_percentile
from app.metrics.models import MetricFlag, MetricRow

logger = logging.getLogger(__name__)

METRIC_COLUMNS = list(MetricRow.model_fields)


# =============================================================================
# NORMALIZATION
# =============================================================================


def normalize_by_field_year(
    rows: Sequence[MetricRow],
    corpus: Corpus,
    g_norm_cohort: GNormCohort = GNormCohort.GIANTS,
) -> list[MetricRow]:
    """Divide C and G by their mean over eligible papers of the same field and year.

    The C cohort is every eligible paper with a known field. The G cohort is
    restricted to papers with G > 0 unless ``g_norm_cohort`` is ALL. A cohort
    mean of 0 leaves the normalized value undefined; ineligible papers and
    papers without a field are not normalized.
    """
    in_cohort = [
        r for r in rows if corpus.eligibility_flags.get(r.paper_id, False) and r.field != UNKNOWN_FIELD
    ]
    c_sum: Counter[tuple[str, int]] = Counter()
    c_n: Counter[tuple[str, int]] = Counter()
    g_sum: Counter[tuple[str, int]] = Counter()
    g_n: Counter[tuple[str, int]] = Counter()
    for r in in_cohort:
        key = (r.field, r.year)
        c_sum[key] += r.C
        c_n[key] += 1
        if g_norm_cohort == GNormCohort.ALL or r.G > 0:
            g_sum[key] += r.G
            g_n[key] += 1

    cohort_ids = {r.paper_id for r in in_cohort}
    out = []
    for r in rows:
        if r.paper_id not in cohort_ids:
            flags = list(r.flags)
            if r.field == UNKNOWN_FIELD and MetricFlag.UNKNOWN_FIELD not in flags:
                flags.append(MetricFlag.UNKNOWN_FIELD)
            out.append(r.model_copy(update={"C_norm": None, "G_norm": None, "flags": flags}))
            continue
        key = (r.field, r.year)
        c_mean = c_sum[key] / c_n[key]
        g_mean = g_sum[key] / g_n[key] if g_n[key] else 0.0
        out.append(
            r.model_copy(
                update={
                    "C_norm": r.C / c_mean if c_mean > 0 else None,
                    "G_norm": r.G / g_mean if g_mean > 0 else None,
                }
            )
        )
    return out


# =============================================================================
# ASSEMBLY
# =============================================================================


@observe(name="build_metric_rows")
def build_metric_rows(
    corpus: Corpus,
    giant_results: Mapping[str, GiantResult],
    metrics: MetricsSettings | None = None,
    show_progress: bool = False,
) -> list[MetricRow]:
    """One MetricRow per corpus paper, in (year, paper_id) order."""
    metrics = metrics or settings.metrics
    exclude_self = metrics.self_citations == SelfCitationMode.EXCLUDE

    counts = citation_counts(corpus, metrics.window)
    g = giant_index(giant_results, corpus, metrics.window, exclude_self_citations=exclude_self)
    g_noself = self_citation_filter(giant_results, corpus)
    d = disruption_all(corpus, show_progress=show_progress)
    dp = disruption_percentile({pid: v[0] for pid, v in d.items()}, corpus)
    dp_cohort_size = Counter(corpus.year_of(pid) for pid in dp)

    rows = []
    for pid, rec in corpus.papers.items():
        D, n_i, n_j, n_k = d[pid]
        result = giant_results.get(pid)
        flags = []
        if D is None:
            flags.append(MetricFlag.D_UNDEFINED)
        elif dp_cohort_size[rec.year] == 1:
            flags.append(MetricFlag.SINGLE_PAPER_DP_COHORT)
        G, G_t = g[pid]
        rows.append(
            MetricRow(
                paper_id=pid,
                year=rec.year,
                field=rec.field,
                venue=rec.venue,
                M=rec.team_size,
                eligible=corpus.eligibility_flags[pid],
                has_giant=result.has_giant if result is not None else None,
                giant_id=result.giant_id if result is not None else None,
                C=counts[pid][0],
                C_t=counts[pid][1],
                G=G,
                G_t=G_t if G_t is not None else G,
                G_noself=g_noself[pid],
                D=D,
                n_i=n_i,
                n_j=n_j,
                n_k=n_k,
                DP=dp.get(pid),
                flags=flags,
            )
        )
    rows = normalize_by_field_year(rows, corpus, metrics.g_norm_cohort)
    logger.info(f"Built {len(rows):,} metric rows (window={metrics.window})")
    return rows


# =============================================================================
# EXPORT
# =============================================================================


def metric_frame(rows: Sequence[MetricRow] | pd.DataFrame) -> pd.DataFrame:
    """Metric rows as a DataFrame with a fixed column order and nullable dtypes."""
    if isinstance(rows, pd.DataFrame):
        return rows
    records = []
    for r in rows:
        record = r.model_dump(mode="json")
        record["flags"] = ",".join(record["flags"])
        records.append(record)
    frame = pd.DataFrame.from_records(records, columns=METRIC_COLUMNS)
    frame["M"] = frame["M"].astype("Int64")
    frame["has_giant"] = frame["has_giant"].astype("boolean")
    return frame


def write_metric_table(
    rows: Sequence[MetricRow], path: Path, table_format: TableFormat = TableFormat.TSV
) -> Path:
    """Write the metric table; undefined values become ``NA``."""
    return write_table(metric_frame(rows), path, table_format)
