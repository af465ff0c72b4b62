"""Team size and disruption profiles of the normalized giant index."""

import logging
from collections.abc import Sequence

import pandas as pd

from app.analysis.binning import dp_bin_index
from app.analysis.models import AnalysisTable
from app.metrics.models import MetricRow
from app.metrics.table import metric_frame

logger = logging.getLogger(__name__)

DISRUPTION_REFERENCE = {"developmental_dp_max": 20, "disruptive_dp_min": 80}


def _mean_curves(frame: pd.DataFrame, keys: list[str]) -> pd.DataFrame:
    giants = frame[frame["G"] > 0]
    base = frame.groupby(keys, sort=True).agg(papers=("C", "size"), mean_C_norm=("C_norm", "mean"))
    giant_part = giants.groupby(keys, sort=True).agg(
        giant_papers=("G", "size"), mean_G_norm=("G_norm", "mean")
    )
    out = base.join(giant_part, how="left").reset_index()
    out["giant_papers"] = out["giant_papers"].fillna(0).astype(int)
    return out


def team_size_curves(rows: Sequence[MetricRow] | pd.DataFrame) -> AnalysisTable:
    """Mean C_norm over all papers and mean G_norm over G > 0 papers, per team size.

    Rows without a team size are left out and counted in the metadata.
    """
    frame = metric_frame(rows)
    has_m = frame["M"].notna()
    missing = int((~has_m).sum())
    if missing:
        logger.info(f"team_size_curves: {missing} papers without team size excluded")
    frame = frame[has_m].astype({"M": int})
    return AnalysisTable(
        name="team_size_curves",
        frame=_mean_curves(frame, ["M"]),
        sections={"by_field": _mean_curves(frame, ["field", "M"])},
        metadata={"missing_team_size": missing},
    )


def disruption_profile(
    rows: Sequence[MetricRow] | pd.DataFrame, dp_bin_width: int = 10
) -> AnalysisTable:
    """Giant index along the disruption percentile.

    Main table: per DP bin, mean G_norm over G > 0 papers and mean G over all.
    Sections: DP distribution of focal papers with and without a giant, and
    the no-giant fraction per team size.
    """
    frame = metric_frame(rows)
    scored = frame[frame["DP"].notna()]
    scored = scored.assign(DP_bin=dp_bin_index(scored["DP"], dp_bin_width))

    giants = scored[scored["G"] > 0]
    main = (
        scored.groupby("DP_bin", sort=True)
        .agg(papers=("G", "size"), mean_G=("G", "mean"))
        .join(
            giants.groupby("DP_bin", sort=True).agg(
                giant_papers=("G", "size"), mean_G_norm=("G_norm", "mean")
            ),
            how="left",
        )
        .reset_index()
    )
    main["giant_papers"] = main["giant_papers"].fillna(0).astype(int)

    focal = scored[scored["has_giant"].notna()]
    focal = focal.assign(group=focal["has_giant"].astype(bool).map({True: "giant", False: "no_giant"}))
    dp_dist = focal.groupby(["group", "DP_bin"], sort=True).size().rename("count").reset_index()
    dp_dist["density"] = dp_dist["count"] / dp_dist.groupby("group")["count"].transform("sum")

    all_focal = frame[frame["has_giant"].notna() & frame["M"].notna()]
    no_giant_by_m = (
        all_focal.assign(no_giant=~all_focal["has_giant"].astype(bool), M=all_focal["M"].astype(int))
        .groupby("M", sort=True)
        .agg(papers=("no_giant", "size"), no_giant=("no_giant", "sum"))
        .reset_index()
    )
    no_giant_by_m["no_giant_fraction"] = no_giant_by_m["no_giant"] / no_giant_by_m["papers"]

    return AnalysisTable(
        name="disruption_profile",
        frame=main,
        sections={"dp_by_giant": dp_dist, "no_giant_by_team_size": no_giant_by_m},
        metadata={
            "dp_bin_width": dp_bin_width,
            "undefined_dp": int(frame["DP"].isna().sum()),
            "reference_values": DISRUPTION_REFERENCE,
        },
    )
