"""Batch giant assignment over every eligible focal paper.

Focal papers are processed year by year. The snapshot is advanced once per
year and shared read-only by the worker threads; results are merged in
(year, paper_id) order, so the output does not depend on the worker count.
"""

import logging
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from itertools import groupby
from pathlib import Path

import pandas as pd
from tqdm import tqdm

from app.cocite.snapshot import CoCitationSnapshot, advance_snapshot, build_snapshot
from app.core.config import CocitationSettings, Damping, GiantSettings, TableFormat, settings
from app.core.tables import write_table
from app.core.tracing import observe
from app.corpus.index import Corpus, eligible_focal_papers
from app.giant.models import GiantResult, ResultFlag
from app.giant.voting import compute_vote_ranks, identify_giant, percolation_stop, top_k_giants

logger = logging.getLogger(__name__)

GIANT_COLUMNS = [
    "focal_id",
    "giant_id",
    "stop_n",
    "percolation_reached",
    "k_max",
    "tie_break_depth",
    "n_refs",
    "n_edges",
    "flags",
    "ranked_refs",
]


def giant_for_paper(
    snapshot: CoCitationSnapshot,
    paper_id: str,
    exclude_own_refs: bool = True,
    count_isolated_in_n: bool = True,
    damping: Damping = Damping.DELTA,
    top_k: int = 1,
) -> GiantResult:
    """Run the vote/percolation procedure for one focal paper.

    Args:
        snapshot: Snapshot of the focal paper's publication year.
        paper_id: Focal paper.
        exclude_own_refs: Remove the focal paper's own pairs before voting.
        count_isolated_in_n: Count never-co-cited references in N.
        damping: With LINEAR damping the ``top_k`` references by importance
            score are recorded in ``ranked_refs``.
        top_k: References to rank under LINEAR damping.
    """
    corpus = snapshot.corpus
    refs = corpus.resolved_refs[paper_id]
    if not refs:
        return GiantResult(focal_id=paper_id, flags=[ResultFlag.NO_RESOLVED_REFS])

    ranks = compute_vote_ranks(snapshot, refs, paper_id, exclude_own_refs, count_isolated_in_n)
    stop_n, _ = percolation_stop(ranks)
    sub = ranks.subnetwork_at(stop_n)
    result = identify_giant(sub, snapshot)
    if damping == Damping.LINEAR and result.has_giant:
        result.ranked_refs = top_k_giants(result, sub, top_k, snapshot)
    if len(refs) < corpus.ingest.min_references:
        result.flags.insert(0, ResultFlag.FEW_RESOLVED_REFS)
    return result


@observe(name="assign_all_giants")
def assign_all_giants(
    corpus: Corpus,
    year_range: tuple[int, int] | None = None,
    giant: GiantSettings | None = None,
    cocite: CocitationSettings | None = None,
    base_snapshot: CoCitationSnapshot | None = None,
    show_progress: bool = False,
) -> dict[str, GiantResult]:
    """One GiantResult per eligible focal paper in ``year_range``.

    Args:
        corpus: Loaded corpus.
        year_range: Inclusive focal years; defaults to the configured range,
            then to the whole corpus.
        giant: Giant settings (defaults to ``settings.giant``).
        cocite: Snapshot settings (defaults to ``settings.cocite``).
        base_snapshot: Snapshot to start from, e.g. loaded from cache. Must not
            be newer than the first focal year.
        show_progress: Show a per-year progress bar.

    Returns:
        focal_id -> GiantResult in (year, paper_id) order.
    """
    giant = giant or settings.giant
    cocite = cocite or settings.cocite
    if year_range is None:
        y_min, y_max = corpus.year_range
        year_range = (giant.year_from or y_min, giant.year_to or y_max)

    focal = eligible_focal_papers(corpus, year_range)
    logger.info(f"Assigning giants for {len(focal):,} focal papers in {year_range[0]}-{year_range[1]}")
    if not focal:
        return {}

    by_year = [(year, list(ids)) for year, ids in groupby(focal, key=corpus.year_of)]
    first_year = by_year[0][0]
    if base_snapshot is not None and base_snapshot.as_of_year > first_year:
        raise ValueError(f"base snapshot {base_snapshot.as_of_year} is newer than focal year {first_year}")
    snapshot = base_snapshot or build_snapshot(corpus, first_year, workers=giant.workers)

    def one(paper_id: str) -> GiantResult:
        return giant_for_paper(
            snapshot,
            paper_id,
            cocite.exclude_own_refs,
            giant.count_isolated_in_n,
            giant.damping,
            giant.top_k,
        )

    results: dict[str, GiantResult] = {}
    with ThreadPoolExecutor(max_workers=giant.workers) as pool:
        for year, ids in tqdm(by_year, desc="Giants", unit="year", disable=not show_progress):
            snapshot = advance_snapshot(snapshot, corpus, year, workers=giant.workers)
            if giant.workers > 1:
                year_results = list(pool.map(one, ids))
            else:
                year_results = [one(pid) for pid in ids]
            for result in year_results:
                results[result.focal_id] = result
            logger.debug(f"{year}: {sum(r.has_giant for r in year_results)}/{len(ids)} with giant")

    with_giant = sum(r.has_giant for r in results.values())
    logger.info(f"Giants found for {with_giant:,}/{len(results):,} focal papers")
    return results


def giant_table(results: Iterable[GiantResult]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in results], columns=GIANT_COLUMNS)


def write_giant_table(
    results: dict[str, GiantResult], path: Path, table_format: TableFormat = TableFormat.TSV
) -> Path:
    """Write the giants table (TSV or JSON-lines). Missing giants are written as NONE."""
    return write_table(giant_table(results.values()), path, table_format)
