"""Matched-cohort comparison of target papers (e.g. prize-winning) against look-alikes.

Each target is matched with papers of the same year and field whose
citation count lies within a relative band around the target's. No target
is ever used as a control.
"""

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from app.analysis.binning import log_bin_index, with_bin_bounds
from app.analysis.models import AnalysisTable
from app.corpus.index import Corpus
from app.corpus.schema import UNKNOWN_FIELD
from app.metrics.models import MetricRow
from app.metrics.table import metric_frame

logger = logging.getLogger(__name__)

MATCHING_REFERENCE = {
    "fraction_targets_higher": 0.67,
    "median_G_targets": {"physics": 58, "chemistry": 51, "medicine": 59.5},
    "median_G_controls": {"physics": 20, "chemistry": 22, "medicine": 24},
}


def read_targets(path: Path) -> list[str]:
    """One paper id per line; blank lines and ``#`` comments are skipped."""
    if not path.exists():
        raise FileNotFoundError(f"Targets file not found: {path}")
    ids = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            text = line.split("#", 1)[0].strip()
            if text:
                ids.append(text)
    return list(dict.fromkeys(ids))


def matched_cohort_compare(
    target_papers: Iterable[str],
    rows: Sequence[MetricRow] | pd.DataFrame,
    corpus: Corpus,
    band: float = 0.2,
    min_bin_count: int = 5,
    bins_per_decade: int = 10,
) -> AnalysisTable:
    """Compare the giant index of targets with their matched comparison sets.

    Returns:
        Main table, one row per target: matched set size, control mean and
        median G, and whether the target's G is higher, equal or lower than
        the control mean. Sections: ``ratio`` (P(G)/P_C(G) per G bin, only
        where both counts reach ``min_bin_count``), ``medians`` (per field)
        and ``controls`` (every target/control pair).
    """
    frame = metric_frame(rows).set_index("paper_id", drop=False)
    targets = list(dict.fromkeys(target_papers))
    known = [t for t in targets if t in frame.index]
    unknown = len(targets) - len(known)
    if unknown:
        logger.warning(f"{unknown} target papers are not in the corpus")
    target_set = set(targets)

    candidates = frame[~frame["paper_id"].isin(target_set) & (frame["field"] != UNKNOWN_FIELD)]
    pools = {key: group for key, group in candidates.groupby(["year", "field"], sort=False)}

    per_target = []
    pairs = []
    unmatched = 0
    for t in known:
        row = frame.loc[t]
        lo, hi = row["C"] * (1 - band), row["C"] * (1 + band)
        pool = pools.get((row["year"], row["field"]))
        matched = pool[(pool["C"] >= lo) & (pool["C"] <= hi)] if pool is not None else candidates.iloc[:0]
        if matched.empty:
            unmatched += 1
            per_target.append(
                {
                    "paper_id": t,
                    "year": int(row["year"]),
                    "field": row["field"],
                    "C": int(row["C"]),
                    "G": int(row["G"]),
                    "matched": 0,
                    "control_mean_G": None,
                    "control_median_G": None,
                    "comparison": "unmatched",
                }
            )
            continue
        control_mean = float(matched["G"].mean())
        comparison = "higher" if row["G"] > control_mean else "lower" if row["G"] < control_mean else "equal"
        per_target.append(
            {
                "paper_id": t,
                "year": int(row["year"]),
                "field": row["field"],
                "C": int(row["C"]),
                "G": int(row["G"]),
                "matched": len(matched),
                "control_mean_G": control_mean,
                "control_median_G": float(matched["G"].median()),
                "comparison": comparison,
            }
        )
        pairs.extend(
            {"target_id": t, "control_id": c, "C": int(cc), "G": int(g)}
            for c, cc, g in zip(matched["paper_id"], matched["C"], matched["G"], strict=True)
        )

    main = pd.DataFrame.from_records(
        per_target,
        columns=[
            "paper_id",
            "year",
            "field",
            "C",
            "G",
            "matched",
            "control_mean_G",
            "control_median_G",
            "comparison",
        ],
    )
    controls = pd.DataFrame.from_records(pairs, columns=["target_id", "control_id", "C", "G"])
    matched_targets = main[main["comparison"] != "unmatched"]

    ratio = _ratio_curve(matched_targets["G"], controls["G"], bins_per_decade, min_bin_count)
    medians = _medians(matched_targets, controls, frame)
    fraction_higher = (
        float((matched_targets["comparison"] == "higher").mean()) if len(matched_targets) else None
    )
    return AnalysisTable(
        name="matched_cohort_compare",
        frame=main,
        sections={"ratio": ratio, "medians": medians, "controls": controls},
        metadata={
            "targets": len(targets),
            "unknown_targets": unknown,
            "unmatched_targets": unmatched,
            "band": band,
            "fraction_higher": fraction_higher,
            "reference_values": MATCHING_REFERENCE,
        },
    )


def _ratio_curve(
    target_g: pd.Series, control_g: pd.Series, bins_per_decade: int, min_count: int
) -> pd.DataFrame:
    t_bins = pd.Series(log_bin_index(target_g, bins_per_decade)).value_counts()
    c_bins = pd.Series(log_bin_index(control_g, bins_per_decade)).value_counts()
    table = pd.DataFrame({"targets": t_bins, "controls": c_bins}).fillna(0).astype(int)
    table = table.sort_index().rename_axis("G_bin").reset_index()
    p_t = table["targets"] / max(1, len(target_g))
    p_c = table["controls"] / max(1, len(control_g))
    enough = (table["targets"] >= min_count) & (table["controls"] >= min_count)
    table["ratio"] = (p_t / p_c).where(enough)
    return with_bin_bounds(table, "G_bin", bins_per_decade)


def _medians(targets: pd.DataFrame, controls: pd.DataFrame, frame: pd.DataFrame) -> pd.DataFrame:
    control_fields = frame.loc[controls["target_id"], "field"].to_numpy() if len(controls) else np.array([])
    controls = controls.assign(field=control_fields)
    records = []
    for field in sorted(targets["field"].unique()):
        t = targets.loc[targets["field"] == field, "G"]
        c = controls.loc[controls["field"] == field, "G"]
        t_med = float(t.median())
        c_med = float(c.median()) if len(c) else None
        records.append(
            {
                "field": field,
                "targets": len(t),
                "controls": len(c),
                "median_G_targets": t_med,
                "median_G_controls": c_med,
                "median_ratio": t_med / c_med if c_med else None,
            }
        )
    return pd.DataFrame.from_records(
        records,
        columns=["field", "targets", "controls", "median_G_targets", "median_G_controls", "median_ratio"],
    )
