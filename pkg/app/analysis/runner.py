"""Named analyses and the driver that runs them.

``ANALYSES`` maps each analysis name (the CLI's ``analyze <name>``) to a
function of AnalysisInputs, so the pipeline can run any subset by name.
"""

import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from app.analysis.impact import (
    cohort_future_impact,
    conditional_G_given_C,
    impact_distributions,
    no_giant_profile,
    self_citation_effect,
)
from app.analysis.matching import matched_cohort_compare
from app.analysis.models import AnalysisTable, CohortSpec
from app.analysis.prevalence import giant_share_by_field, giant_vs_most_cited, prevalence_by_year
from app.analysis.structure import disruption_profile, team_size_curves
from app.core.config import AnalysisSettings, settings
from app.core.errors import CohortTooSmallError
from app.corpus.index import Corpus
from app.giant.models import GiantResult
from app.metrics.models import MetricRow

logger = logging.getLogger(__name__)


@dataclass
class AnalysisInputs:
    """Everything an analysis may read."""

    corpus: Corpus
    giant_results: Mapping[str, GiantResult]
    rows: Sequence[MetricRow]
    analysis: AnalysisSettings = field(default_factory=lambda: settings.analysis)
    window: int = 5
    targets: list[str] | None = None
    cohort: CohortSpec | None = None


def default_cohort(inputs: AnalysisInputs) -> CohortSpec:
    """Earliest-years cohort that still leaves room for the full trajectory.

    Runs from the first corpus year to the earlier of the middle year and
    the last year with ``window + horizon`` years of citations after it,
    never before the first year. Every field counts, and every paper cited
    at least once within the window.
    """
    y_min, y_max = inputs.corpus.year_range
    last = max(y_min, min(y_min + (y_max - y_min) // 2, y_max - inputs.window - inputs.analysis.horizon))
    return CohortSpec(year=y_min, year_to=last, c_lo=1, window_t=inputs.window)


def _cohort(inputs: AnalysisInputs) -> AnalysisTable:
    a = inputs.analysis
    return cohort_future_impact(
        inputs.rows,
        inputs.corpus,
        inputs.cohort or default_cohort(inputs),
        inputs.giant_results,
        group_fraction=a.group_fraction,
        min_cohort=a.min_cohort,
        horizon=a.horizon,
    )


def _matched(inputs: AnalysisInputs) -> AnalysisTable:
    a = inputs.analysis
    return matched_cohort_compare(
        inputs.targets or [],
        inputs.rows,
        inputs.corpus,
        band=a.citation_band,
        min_bin_count=a.min_bin_count,
        bins_per_decade=a.bins_per_decade,
    )


ANALYSES: dict[str, Callable[[AnalysisInputs], AnalysisTable]] = {
    "prevalence_by_year": lambda i: prevalence_by_year(i.giant_results, i.corpus),
    "giant_vs_most_cited": lambda i: giant_vs_most_cited(i.giant_results, i.corpus),
    "giant_share_by_field": lambda i: giant_share_by_field(i.rows),
    "conditional_G_given_C": lambda i: conditional_G_given_C(i.rows, i.analysis.bins_per_decade),
    "self_citation_effect": lambda i: self_citation_effect(i.rows, i.analysis.bins_per_decade),
    "no_giant_profile": lambda i: no_giant_profile(
        i.rows, i.analysis.bins_per_decade, i.analysis.min_bin_count
    ),
    "impact_distributions": lambda i: impact_distributions(i.rows, i.analysis.bins_per_decade),
    "team_size_curves": lambda i: team_size_curves(i.rows),
    "disruption_profile": lambda i: disruption_profile(i.rows, i.analysis.dp_bin_width),
    "cohort_future_impact": _cohort,
    "matched_cohort_compare": _matched,
}


def run_analyses(
    inputs: AnalysisInputs, names: Iterable[str] | None = None
) -> tuple[list[AnalysisTable], dict[str, str]]:
    """Run the named analyses (all by default).

    A too-small cohort skips that analysis; matched comparisons are skipped
    without a target list.

    Returns:
        The tables produced and a name -> reason map of skipped analyses.

    Raises:
        KeyError: For an unknown analysis name.
    """
    selected = list(names) if names is not None else list(ANALYSES)
    unknown = [n for n in selected if n not in ANALYSES]
    if unknown:
        raise KeyError(f"unknown analyses {unknown}; choose from {sorted(ANALYSES)}")

    tables: list[AnalysisTable] = []
    skipped: dict[str, str] = {}
    for name in selected:
        if name == "matched_cohort_compare" and not inputs.targets:
            skipped[name] = "no target papers given"
            logger.info(f"Skipping {name}: no target papers given")
            continue
        try:
            tables.append(ANALYSES[name](inputs))
        except CohortTooSmallError as e:
            skipped[name] = str(e)
            logger.warning(f"Skipping {name}: {e}")
            continue
        logger.info(f"Analysis {name}: {len(tables[-1].frame)} rows")
    return tables, skipped
