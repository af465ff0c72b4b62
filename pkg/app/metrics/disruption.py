"""Disruption score and its same-year percentile.

For a paper p with resolved references R, over subsequent papers (published
in p's year or later, p itself excluded):

    n_i  cite p but none of R
    n_j  cite p and at least one of R
    n_k  cite at least one of R but not p

    D = (n_i - n_j) / (n_i + n_j + n_k)

Counts are computed in batches with sparse products: row p of
``A[batch] @ A.T`` is non-zero exactly at the papers sharing a reference
with p, i.e. the citers of R.
"""

import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping

import numpy as np
from scipy import sparse
from scipy.stats import rankdata
from tqdm import tqdm

from app.corpus.index import Corpus

logger = logging.getLogger(__name__)

DISRUPTION_BATCH = 1024

DisruptionCounts = tuple[float | None, int, int, int]


def _batch_counts(corpus: Corpus, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(n_i, n_j, n_k) for the papers at ``rows``."""
    n = len(corpus)
    coupled = (corpus.citations[rows] @ corpus.citations.T).tocoo()
    focal = rows[coupled.row]
    keep = (corpus.years[coupled.col] >= corpus.years[focal]) & (coupled.col != focal)
    ref_citers = sparse.csr_matrix(
        (np.ones(int(keep.sum()), dtype=np.int32), (coupled.row[keep], coupled.col[keep])),
        shape=(len(rows), n),
    )
    # citers are never older than the paper they cite
    citers = corpus.cited_by[rows]
    n_j = np.asarray(citers.multiply(ref_citers).sum(axis=1)).ravel().astype(np.int64)
    n_i = np.diff(citers.indptr).astype(np.int64) - n_j
    n_k = np.diff(ref_citers.indptr).astype(np.int64) - n_j
    return n_i, n_j, n_k


def _score(n_i: int, n_j: int, n_k: int) -> float | None:
    denominator = n_i + n_j + n_k
    if denominator == 0:
        return None
    return (n_i - n_j) / denominator


def disruption(corpus: Corpus, paper: str) -> DisruptionCounts:
    """(D, n_i, n_j, n_k) for one paper; D is None when nothing cites the paper or its references.

    Raises:
        KeyError: If the paper is not in the corpus.
    """
    if paper not in corpus.index:
        raise KeyError(f"unknown paper {paper!r}")
    n_i, n_j, n_k = _batch_counts(corpus, np.array([corpus.index[paper]], dtype=np.int64))
    return _score(int(n_i[0]), int(n_j[0]), int(n_k[0])), int(n_i[0]), int(n_j[0]), int(n_k[0])


def disruption_all(
    corpus: Corpus, paper_ids: Iterable[str] | None = None, show_progress: bool = False
) -> dict[str, DisruptionCounts]:
    """Disruption counts for many papers (all papers by default), in index order."""
    if paper_ids is None:
        indices = np.arange(len(corpus), dtype=np.int64)
    else:
        indices = np.sort(np.fromiter((corpus.index[p] for p in paper_ids), dtype=np.int64))
    out: dict[str, DisruptionCounts] = {}
    batches = range(0, len(indices), DISRUPTION_BATCH)
    for start in tqdm(batches, desc="Disruption", unit="batch", disable=not show_progress):
        rows = indices[start : start + DISRUPTION_BATCH]
        n_i, n_j, n_k = _batch_counts(corpus, rows)
        for row, a, b, c in zip(rows, n_i, n_j, n_k, strict=True):
            out[corpus.ids[row]] = (_score(int(a), int(b), int(c)), int(a), int(b), int(c))
    undefined = sum(1 for d, *_ in out.values() if d is None)
    logger.info(f"Disruption computed for {len(out):,} papers ({undefined:,} undefined)")
    return out


def disruption_percentile(all_D: Mapping[str, float | None], corpus: Corpus) -> dict[str, float]:
    """Percentile of D among papers of the same publication year.

    Ties share their mean rank; DP = 100 * (rank - 1) / (cohort - 1), so 0 is
    the most developmental and 100 the most disruptive. Papers with undefined
    D are left out. A cohort of one gets DP = 50.
    """
    cohorts: dict[int, list[tuple[str, float]]] = defaultdict(list)
    for pid, d in all_D.items():
        if d is not None:
            cohorts[corpus.year_of(pid)].append((pid, d))

    out: dict[str, float] = {}
    for year in sorted(cohorts):
        members = cohorts[year]
        if len(members) == 1:
            logger.warning(f"Disruption cohort {year} has a single paper; DP set to 50")
            out[members[0][0]] = 50.0
            continue
        ranks = rankdata([d for _, d in members], method="average")
        scale = 100.0 / (len(members) - 1)
        for (pid, _), rank in zip(members, ranks, strict=True):
            out[pid] = float((rank - 1) * scale)
    return out
