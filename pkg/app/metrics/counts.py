"""Citation counts, giant index and the self-citation filter."""

import logging
from collections import Counter
from collections.abc import Mapping

import numpy as np

from app.corpus.index import Corpus
from app.giant.models import GiantResult

logger = logging.getLogger(__name__)


def citation_counts(corpus: Corpus, window: int | None = None) -> dict[str, tuple[int, int]]:
    """C and C_t for every paper.

    C counts distinct citing papers. C_t counts those published within
    ``window`` years of the cited paper (C_t == C when no window is given).
    """
    cited_by = corpus.cited_by
    totals = np.diff(cited_by.indptr)
    if window is None:
        windowed = totals
    else:
        owner = np.repeat(np.arange(len(corpus)), totals)
        in_window = corpus.years[cited_by.indices] <= corpus.years[owner] + window
        windowed = np.bincount(owner[in_window], minlength=len(corpus))
    return {
        pid: (int(c), int(ct)) for pid, c, ct in zip(corpus.ids, totals, windowed, strict=True)
    }


def is_self_citation(corpus: Corpus, focal_id: str, giant_id: str) -> bool:
    """Focal and giant share an author key (first initial, last name).

    Papers without author lists never match.
    """
    return bool(corpus.papers[focal_id].author_keys & corpus.papers[giant_id].author_keys)


def giant_index(
    giant_results: Mapping[str, GiantResult],
    corpus: Corpus,
    window_t: int | None = None,
    exclude_self_citations: bool = False,
) -> dict[str, tuple[int, int | None]]:
    """G and G_t for every corpus paper.

    G counts focal papers whose giant is the paper. G_t only counts focal
    papers published at most ``window_t`` years after it (None without a
    window).
    """
    total: Counter[str] = Counter()
    windowed: Counter[str] = Counter()
    for result in giant_results.values():
        giant = result.giant_id
        if giant is None:
            continue
        if exclude_self_citations and is_self_citation(corpus, result.focal_id, giant):
            continue
        total[giant] += 1
        if window_t is not None and corpus.year_of(result.focal_id) <= corpus.year_of(giant) + window_t:
            windowed[giant] += 1
    return {
        pid: (total[pid], windowed[pid] if window_t is not None else None) for pid in corpus.ids
    }


def self_citation_filter(giant_results: Mapping[str, GiantResult], corpus: Corpus) -> dict[str, int]:
    """G_noself for every corpus paper: G without focal papers sharing an author with the giant."""
    counts: Counter[str] = Counter()
    removed = 0
    for result in giant_results.values():
        if result.giant_id is None:
            continue
        if is_self_citation(corpus, result.focal_id, result.giant_id):
            removed += 1
            continue
        counts[result.giant_id] += 1
    logger.info(f"Self-citation filter removed {removed} giant assignments")
    return {pid: counts[pid] for pid in corpus.ids}
