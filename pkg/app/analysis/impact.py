"""Giant index against citation impact.

All citation-conditioned tables use logarithmic C bins (``bins_per_decade``
per decade, separate bin for C = 0). Empty bins are omitted.
"""

import logging
import math
from collections.abc import Mapping, Sequence

import numpy as np
import pandas as pd

from app.analysis.binning import log_bin_index, with_bin_bounds
from app.analysis.models import AnalysisTable, CohortSpec
from app.core.errors import CohortTooSmallError
from app.corpus.index import Corpus
from app.giant.models import GiantResult
from app.metrics.counts import giant_index
from app.metrics.models import MetricRow
from app.metrics.table import metric_frame

logger = logging.getLogger(__name__)

FUTURE_IMPACT_REFERENCE = {"high_group_mean_G5": 31.3, "low_group_mean_G5": 1.0}


def conditional_G_given_C(
    rows: Sequence[MetricRow] | pd.DataFrame, bins_per_decade: int = 10
) -> AnalysisTable:
    """P(G > 0), mean G and the G histogram within each C bin."""
    frame = metric_frame(rows)
    frame = frame.assign(C_bin=log_bin_index(frame["C"], bins_per_decade))
    summary = (
        frame.groupby("C_bin", sort=True)
        .agg(papers=("G", "size"), frac_G_pos=("G", lambda g: float((g > 0).mean())), mean_G=("G", "mean"))
        .reset_index()
    )
    histogram = frame.groupby(["C_bin", "G"], sort=True).size().rename("count").reset_index()
    histogram["p_G_given_C"] = histogram["count"] / histogram.groupby("C_bin")["count"].transform("sum")
    return AnalysisTable(
        name="conditional_G_given_C",
        frame=with_bin_bounds(summary, "C_bin", bins_per_decade),
        sections={"histogram": with_bin_bounds(histogram, "C_bin", bins_per_decade)},
        metadata={"bins_per_decade": bins_per_decade},
    )


def self_citation_effect(
    rows: Sequence[MetricRow] | pd.DataFrame, bins_per_decade: int = 10
) -> AnalysisTable:
    """Fraction of papers with G > 0 before and after removing self-citing focal papers, per C bin."""
    frame = metric_frame(rows)
    frame = frame.assign(C_bin=log_bin_index(frame["C"], bins_per_decade))
    table = (
        frame.groupby("C_bin", sort=True)
        .agg(
            papers=("G", "size"),
            frac_G_pos=("G", lambda g: float((g > 0).mean())),
            frac_G_noself_pos=("G_noself", lambda g: float((g > 0).mean())),
            mean_G=("G", "mean"),
            mean_G_noself=("G_noself", "mean"),
        )
        .reset_index()
    )
    removed = int((frame["G"] - frame["G_noself"]).sum())
    return AnalysisTable(
        name="self_citation_effect",
        frame=with_bin_bounds(table, "C_bin", bins_per_decade),
        metadata={"bins_per_decade": bins_per_decade, "self_citing_assignments": removed},
    )


def no_giant_profile(
    rows: Sequence[MetricRow] | pd.DataFrame, bins_per_decade: int = 10, min_bin_count: int = 5
) -> AnalysisTable:
    """Citation profile of focal papers with and without a giant.

    The main table gives P(C) for both groups. The ``relative`` section looks
    only at papers without a giant and compares P(C | G > 0) with
    P(C | G = 0); the ratio is reported where both counts reach
    ``min_bin_count``.
    """
    frame = metric_frame(rows)
    focal = frame[frame["has_giant"].notna()]
    focal = focal.assign(
        C_bin=log_bin_index(focal["C"], bins_per_decade),
        group=np.where(focal["has_giant"].astype(bool), "giant", "no_giant"),
    )
    counts = focal.groupby(["C_bin", "group"]).size().unstack("group", fill_value=0)
    counts = counts.reindex(columns=["giant", "no_giant"], fill_value=0).reset_index()
    for group in ("giant", "no_giant"):
        total = counts[group].sum()
        counts[f"p_{group}"] = counts[group] / total if total else np.nan

    no_giant = focal[focal["group"] == "no_giant"]
    rel = (
        no_giant.assign(G_pos=no_giant["G"] > 0)
        .groupby(["C_bin", "G_pos"])
        .size()
        .unstack("G_pos", fill_value=0)
        .reindex(columns=[True, False], fill_value=0)
        .rename(columns={True: "n_G_pos", False: "n_G_zero"})
        .reset_index()
    )
    rel.columns.name = None
    for col, p in (("n_G_pos", "p_G_pos"), ("n_G_zero", "p_G_zero")):
        total = rel[col].sum()
        rel[p] = rel[col] / total if total else np.nan
    enough = (rel["n_G_pos"] >= min_bin_count) & (rel["n_G_zero"] >= min_bin_count)
    rel["ratio"] = (rel["p_G_pos"] / rel["p_G_zero"]).where(enough)
    counts.columns.name = None
    return AnalysisTable(
        name="no_giant_profile",
        frame=with_bin_bounds(counts, "C_bin", bins_per_decade),
        sections={"relative": with_bin_bounds(rel, "C_bin", bins_per_decade)},
        metadata={
            "focal_papers": len(focal),
            "no_giant_papers": len(no_giant),
            "min_bin_count": min_bin_count,
        },
    )


def impact_distributions(
    rows: Sequence[MetricRow] | pd.DataFrame, bins_per_decade: int = 10
) -> AnalysisTable:
    """Histograms of C for giant (G > 0) and non-giant papers, and of G per publication decade."""
    frame = metric_frame(rows)
    frame = frame.assign(
        C_bin=log_bin_index(frame["C"], bins_per_decade),
        G_bin=log_bin_index(frame["G"], bins_per_decade),
        group=np.where(frame["G"] > 0, "giant", "non_giant"),
        decade=(frame["year"] // 10) * 10,
    )
    c_hist = frame.groupby(["group", "C_bin"], sort=True).size().rename("count").reset_index()
    c_hist["density"] = c_hist["count"] / c_hist.groupby("group")["count"].transform("sum")
    g_hist = frame.groupby(["decade", "G_bin"], sort=True).size().rename("count").reset_index()
    g_hist["density"] = g_hist["count"] / g_hist.groupby("decade")["count"].transform("sum")
    return AnalysisTable(
        name="impact_distributions",
        frame=with_bin_bounds(c_hist, "C_bin", bins_per_decade),
        sections={"G_by_decade": with_bin_bounds(g_hist, "G_bin", bins_per_decade)},
        metadata={"bins_per_decade": bins_per_decade},
    )


# =============================================================================
# COHORT TRAJECTORIES
# =============================================================================


def _windowed_citations(corpus: Corpus, pid: str, window: int) -> int:
    i = corpus.index[pid]
    citer_years = corpus.years[corpus.citer_indices(i)]
    return int(np.searchsorted(citer_years, corpus.years[i] + window, side="right"))


def _trajectory(corpus: Corpus, pid: str, offsets: np.ndarray) -> np.ndarray:
    """Cumulative citations at publication year + each offset."""
    i = corpus.index[pid]
    citer_years = corpus.years[corpus.citer_indices(i)]
    return np.searchsorted(citer_years, corpus.years[i] + offsets, side="right")


def cohort_future_impact(
    rows: Sequence[MetricRow] | pd.DataFrame,
    corpus: Corpus,
    selection: CohortSpec,
    giant_results: Mapping[str, GiantResult] | None = None,
    group_fraction: float = 0.1,
    min_cohort: int = 30,
    horizon: int = 10,
) -> AnalysisTable:
    """Citation trajectories of high-G_t, low-G_t and G_t = 0 papers of one cohort.

    The cohort is every paper matching the selection's years, field and venue
    whose windowed citations fall inside the band (bounds inclusive). Among
    cohort papers with G_t > 0 the top and bottom ``group_fraction`` form the
    high and low groups. G_t comes from ``giant_results`` when given,
    otherwise from the rows (which then must use the same window).

    Returns:
        Per group and year offset: mean cumulative citations, standard error
        and group size, for offsets 0..window_t + horizon. The metadata holds
        each group's mean citations gained after the window
        (``gain_after_window``).

    Raises:
        CohortTooSmallError: If fewer than ``min_cohort`` papers match.
    """
    frame = metric_frame(rows)
    selected = frame[(frame["year"] >= selection.year) & (frame["year"] <= selection.last_year)]
    if selection.field is not None:
        selected = selected[selected["field"] == selection.field]
    if selection.venue is not None:
        selected = selected[selected["venue"] == selection.venue]

    if giant_results is not None:
        g = giant_index(giant_results, corpus, selection.window_t)
        g_t = {pid: gt for pid, (_, gt) in g.items()}
    else:
        g_t = dict(zip(frame["paper_id"], frame["G_t"], strict=True))

    members = []
    for pid in selected["paper_id"]:
        c_t = _windowed_citations(corpus, pid, selection.window_t)
        if selection.in_band(c_t):
            members.append((corpus.index[pid], pid, c_t, int(g_t[pid] or 0)))
    if len(members) < min_cohort:
        raise CohortTooSmallError(len(members), min_cohort)

    positive = [m for m in members if m[3] > 0]
    k = max(1, math.floor(group_fraction * len(positive))) if positive else 0
    high = sorted(positive, key=lambda m: (-m[3], m[0]))[:k]
    low = sorted(positive, key=lambda m: (m[3], m[0]))[:k]
    groups = {
        "high_G": high,
        "low_G": low,
        "zero_G": [m for m in members if m[3] == 0],
    }

    offsets = np.arange(selection.window_t + horizon + 1)
    records = []
    member_records = []
    gains: dict[str, float | None] = {group: None for group in groups}
    for group, papers in groups.items():
        if not papers:
            continue
        curves = np.vstack([_trajectory(corpus, pid, offsets) for _, pid, _, _ in papers])
        means = curves.mean(axis=0)
        gains[group] = float(means[-1] - means[selection.window_t])
        sem = curves.std(axis=0, ddof=1) / math.sqrt(len(papers)) if len(papers) > 1 else None
        for t in offsets:
            records.append(
                {
                    "group": group,
                    "offset": int(t),
                    "papers": len(papers),
                    "mean_citations": float(means[t]),
                    "sem": float(sem[t]) if sem is not None else None,
                }
            )
        for _, pid, c_t, gt in papers:
            member_records.append({"group": group, "paper_id": pid, "C_t": c_t, "G_t": gt})

    group_mean_g = {
        group: float(np.mean([m[3] for m in papers])) if papers else None
        for group, papers in groups.items()
    }
    return AnalysisTable(
        name="cohort_future_impact",
        frame=pd.DataFrame.from_records(
            records, columns=["group", "offset", "papers", "mean_citations", "sem"]
        ),
        sections={
            "members": pd.DataFrame.from_records(
                member_records, columns=["group", "paper_id", "C_t", "G_t"]
            )
        },
        metadata={
            "cohort": selection.model_dump(mode="json"),
            "cohort_size": len(members),
            "group_sizes": {group: len(papers) for group, papers in groups.items()},
            "group_mean_G_t": group_mean_g,
            "gain_after_window": gains,
            "horizon": horizon,
            "reference_values": FUTURE_IMPACT_REFERENCE,
        },
    )
