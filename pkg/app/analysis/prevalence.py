"""How common giants are, and how often the giant is not the most cited reference."""

import logging
from collections.abc import Mapping, Sequence

import numpy as np
import pandas as pd

from app.analysis.models import AnalysisTable
from app.corpus.index import Corpus
from app.giant.models import GiantResult
from app.metrics.models import MetricRow
from app.metrics.table import metric_frame

logger = logging.getLogger(__name__)

# Published values measured on the full Web of Science corpus; recorded for
# comparison only.
PREVALENCE_REFERENCE = {"fraction_with_giant_1955": 0.916, "fraction_with_giant_2014": 0.958}
MOST_CITED_REFERENCE = {
    "fraction_not_most_cited_overall": 0.725,
    "fraction_most_cited_1955": 0.44,
    "fraction_most_cited_2014": 0.26,
}
GIANT_SHARE_REFERENCE = {"share_of_papers_with_G_pos": 0.12}


def _fraction(num: pd.Series, den: pd.Series) -> pd.Series:
    return (num / den).where(den > 0)


def prevalence_by_year(results: Mapping[str, GiantResult], corpus: Corpus) -> AnalysisTable:
    """Fraction of eligible focal papers with a giant, per year and per field and year."""
    frame = pd.DataFrame(
        {
            "year": [corpus.year_of(pid) for pid in results],
            "field": [corpus.field_of(pid) for pid in results],
            "with_giant": [r.has_giant for r in results.values()],
        },
    )
    by_year = (
        frame.groupby("year", sort=True)
        .agg(eligible=("with_giant", "size"), with_giant=("with_giant", "sum"))
        .reset_index()
    )
    by_year["fraction"] = _fraction(by_year["with_giant"], by_year["eligible"])
    by_field = (
        frame.groupby(["field", "year"], sort=True)
        .agg(eligible=("with_giant", "size"), with_giant=("with_giant", "sum"))
        .reset_index()
    )
    by_field["fraction"] = _fraction(by_field["with_giant"], by_field["eligible"])
    overall = float(frame["with_giant"].mean()) if len(frame) else None
    return AnalysisTable(
        name="prevalence_by_year",
        frame=by_year,
        sections={"by_field": by_field},
        metadata={"overall_fraction": overall, "reference_values": PREVALENCE_REFERENCE},
    )


def citations_at_year(corpus: Corpus, i: int, year: int) -> int:
    """Citations of paper ``i`` from papers published up to and including ``year``."""
    # citer indices are in index order, hence in year order
    citer_years = corpus.years[corpus.citer_indices(i)]
    return int(np.searchsorted(citer_years, year, side="right"))


def giant_is_most_cited(corpus: Corpus, result: GiantResult) -> bool:
    """Whether the giant is among the most cited references when the focal paper appeared.

    A giant tied for the maximum counts as most cited.
    """
    if result.giant_id is None:
        raise ValueError(f"{result.focal_id!r} has no giant")
    year = corpus.year_of(result.focal_id)
    counts = {
        ref: citations_at_year(corpus, corpus.index[ref], year)
        for ref in corpus.resolved_refs[result.focal_id]
    }
    return counts[result.giant_id] == max(counts.values())


def giant_vs_most_cited(results: Mapping[str, GiantResult], corpus: Corpus) -> AnalysisTable:
    """Per year: fraction of giant-having papers whose giant is not the most cited reference."""
    records = [
        {
            "year": corpus.year_of(r.focal_id),
            "not_most_cited": not giant_is_most_cited(corpus, r),
        }
        for r in results.values()
        if r.giant_id is not None
    ]
    frame = pd.DataFrame.from_records(records, columns=["year", "not_most_cited"])
    by_year = (
        frame.groupby("year", sort=True)
        .agg(with_giant=("not_most_cited", "size"), not_most_cited=("not_most_cited", "sum"))
        .reset_index()
    )
    by_year["fraction_not_most_cited"] = _fraction(by_year["not_most_cited"], by_year["with_giant"])
    overall = float(frame["not_most_cited"].mean()) if len(frame) else None
    return AnalysisTable(
        name="giant_vs_most_cited",
        frame=by_year,
        metadata={
            "overall_fraction_not_most_cited": overall,
            "reference_values": MOST_CITED_REFERENCE,
        },
    )


def giant_share_by_field(rows: Sequence[MetricRow] | pd.DataFrame) -> AnalysisTable:
    """Share of papers that are the giant of at least one later paper, per field and overall."""
    frame = metric_frame(rows)
    frame = frame.assign(is_giant=frame["G"] > 0)
    by_field = (
        frame.groupby("field", sort=True)
        .agg(papers=("is_giant", "size"), giants=("is_giant", "sum"))
        .reset_index()
    )
    overall = pd.DataFrame(
        [{"field": "ALL", "papers": len(frame), "giants": int(frame["is_giant"].sum())}]
    )
    table = pd.concat([by_field, overall], ignore_index=True)
    table["share"] = _fraction(table["giants"], table["papers"])
    return AnalysisTable(
        name="giant_share_by_field",
        frame=table,
        metadata={"reference_values": GIANT_SHARE_REFERENCE},
    )
