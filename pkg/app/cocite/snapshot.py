"""Temporal co-citation snapshots.

A snapshot as of year y holds, for every pair of papers, the number of
distinct citing papers published up to and including y whose resolved
reference lists contain both. With A the citing × cited incidence matrix
restricted to those citing papers, the weights are the off-diagonal part of
``A.T @ A``.

Snapshots are immutable. ``advance_snapshot`` adds only the citing papers
published after ``as_of_year``, which gives exactly the same weights as a
full rebuild at the new year.

Neighbor ranking (most relevant first): weight descending, then older
neighbor, then smaller paper id. The corpus index is ordered by
(year, paper_id), so the last two keys collapse into "smaller index first",
and a whole ranking is one sort over the packed key ``-weight * M + index``.
"""

import logging
import pickle
import threading
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy import sparse

from app.core.errors import CacheVersionError
from app.core.tracing import observe
from app.corpus.index import Corpus

logger = logging.getLogger(__name__)

SNAPSHOT_CACHE_FORMAT = "giant-lineage/cocite-snapshot"
SNAPSHOT_CACHE_VERSION = 1


class CoCitationSnapshot:
    """Weighted undirected co-citation graph as of ``as_of_year``.

    ``adjacency`` is a symmetric CSR matrix with zero diagonal. Ranked
    neighbor keys are materialized lazily per paper and cached.
    """

    def __init__(self, corpus: Corpus, as_of_year: int, adjacency: sparse.csr_matrix) -> None:
        self.corpus = corpus
        self.as_of_year = as_of_year
        self.adjacency = adjacency
        self.adjacency.sort_indices()
        self._key_base = np.int64(len(corpus) + 1)
        self._ranked: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    # -------------------------------------------------------------------------
    # Raw access
    # -------------------------------------------------------------------------

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices (sorted) and weights of paper ``i``."""
        start, end = self.adjacency.indptr[i], self.adjacency.indptr[i + 1]
        return self.adjacency.indices[start:end], self.adjacency.data[start:end]

    def weight(self, a: str, b: str) -> int:
        """Co-citation weight of two papers (0 when never co-cited or unknown)."""
        ia, ib = self.corpus.index.get(a), self.corpus.index.get(b)
        if ia is None or ib is None:
            return 0
        return self.weight_idx(ia, ib)

    def weight_idx(self, i: int, j: int) -> int:
        neighbors, weights = self.row(i)
        pos = int(np.searchsorted(neighbors, j))
        if pos < len(neighbors) and neighbors[pos] == j:
            return int(weights[pos])
        return 0

    def degree(self, i: int) -> int:
        return int(self.adjacency.indptr[i + 1] - self.adjacency.indptr[i])

    def neighbors(self, paper_id: str) -> list[tuple[str, int]]:
        """Adjacency list of a paper, in index order."""
        i = self.corpus.index.get(paper_id)
        if i is None:
            return []
        neighbors, weights = self.row(i)
        return [(self.corpus.ids[j], int(w)) for j, w in zip(neighbors, weights, strict=True)]

    # -------------------------------------------------------------------------
    # Ranking
    # -------------------------------------------------------------------------

    def pack_keys(self, neighbors: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Rank keys; ascending key order is the neighbor rank order."""
        return -weights.astype(np.int64) * self._key_base + neighbors.astype(np.int64)

    def unpack_keys(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        weights = -(keys // self._key_base)
        neighbors = keys - (-weights) * self._key_base
        return neighbors, weights

    def ranked_keys(self, i: int) -> np.ndarray:
        """Sorted rank keys of paper ``i``'s neighbors (cached)."""
        cached = self._ranked.get(i)
        if cached is not None:
            return cached
        neighbors, weights = self.row(i)
        keys = np.sort(self.pack_keys(neighbors, weights))
        keys.setflags(write=False)
        with self._lock:
            self._ranked[i] = keys
        return keys

    def ranked_neighbors(self, paper_id: str) -> list[tuple[str, int]]:
        """Every neighbor of a paper, most relevant first."""
        i = self.corpus.index.get(paper_id)
        if i is None:
            return []
        neighbors, weights = self.unpack_keys(self.ranked_keys(i))
        return [(self.corpus.ids[j], int(w)) for j, w in zip(neighbors, weights, strict=True)]

    # -------------------------------------------------------------------------
    # Summaries
    # -------------------------------------------------------------------------

    @property
    def pair_count(self) -> int:
        return int(self.adjacency.nnz // 2)

    @property
    def total_weight(self) -> int:
        """Sum of weights over unordered pairs."""
        return int(self.adjacency.sum(dtype=np.int64) // 2)

    def same_weights(self, other: "CoCitationSnapshot") -> bool:
        if self.adjacency.shape != other.adjacency.shape:
            return False
        return (self.adjacency != other.adjacency).nnz == 0


# =============================================================================
# BUILD / ADVANCE
# =============================================================================


def _pair_weights(citations: sparse.csr_matrix, lo: int, hi: int, workers: int) -> sparse.csr_matrix:
    """Co-citation counts contributed by citing papers ``lo <= i < hi``.

    Citing papers are split into contiguous partitions whose ``A_p.T @ A_p``
    products are summed; integer sums make the result independent of the
    partitioning.
    """
    n = citations.shape[1]
    if hi <= lo:
        return sparse.csr_matrix((n, n), dtype=np.int32)

    def part(bounds: tuple[int, int]) -> sparse.csr_matrix:
        block = citations[bounds[0] : bounds[1]]
        return (block.T @ block).tocsr()

    if workers <= 1 or hi - lo < 2 * workers:
        total = part((lo, hi))
    else:
        edges = np.linspace(lo, hi, workers + 1, dtype=np.int64)
        bounds = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:], strict=True) if b > a]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(part, bounds))
        total = parts[0]
        for p in parts[1:]:
            total = total + p
    total = total.tocsr()
    total = (total - sparse.diags(total.diagonal())).tocsr()
    total.eliminate_zeros()
    return total.astype(np.int32)


@observe(name="build_snapshot")
def build_snapshot(corpus: Corpus, year: int, workers: int = 1) -> CoCitationSnapshot:
    """Build the co-citation network from every citing paper published up to ``year``.

    Raises:
        ValueError: If ``year`` lies outside the corpus year range.
    """
    y_min, y_max = corpus.year_range
    if not y_min <= year <= y_max:
        raise ValueError(f"year {year} outside corpus range [{y_min}, {y_max}]")
    _, hi = corpus.index_span(None, year)
    adjacency = _pair_weights(corpus.citations, 0, hi, workers)
    snapshot = CoCitationSnapshot(corpus, year, adjacency)
    logger.info(
        f"Built co-citation snapshot for {year}: {snapshot.pair_count:,} pairs, "
        f"total weight {snapshot.total_weight:,}"
    )
    return snapshot


def advance_snapshot(
    snapshot: CoCitationSnapshot, corpus: Corpus, to_year: int, workers: int = 1
) -> CoCitationSnapshot:
    """Move a snapshot forward to ``to_year``, processing only the new citing papers.

    Raises:
        ValueError: If ``to_year`` is earlier than the snapshot year.
    """
    if to_year < snapshot.as_of_year:
        raise ValueError(f"cannot advance snapshot from {snapshot.as_of_year} back to {to_year}")
    lo, hi = corpus.index_span(snapshot.as_of_year, to_year)
    if hi == lo:
        if to_year == snapshot.as_of_year:
            return snapshot
        return CoCitationSnapshot(corpus, to_year, snapshot.adjacency)
    delta = _pair_weights(corpus.citations, lo, hi, workers)
    adjacency = (snapshot.adjacency + delta).tocsr().astype(np.int32)
    logger.debug(f"Advanced snapshot {snapshot.as_of_year} -> {to_year} with {hi - lo} citing papers")
    return CoCitationSnapshot(corpus, to_year, adjacency)


def top_n_neighbors(snapshot: CoCitationSnapshot, paper: str, n: int) -> list[tuple[str, int]]:
    """The ``n`` most co-cited neighbors of ``paper`` under the rank rule.

    Returns fewer than ``n`` entries when the paper has fewer neighbors and
    an empty list for papers that were never co-cited or are unknown.

    Raises:
        ValueError: If ``n < 1``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    i = snapshot.corpus.index.get(paper)
    if i is None:
        return []
    neighbors, weights = snapshot.unpack_keys(snapshot.ranked_keys(i)[:n])
    return [(snapshot.corpus.ids[j], int(w)) for j, w in zip(neighbors, weights, strict=True)]


def adjusted_row(
    snapshot: CoCitationSnapshot, i: int, exclude: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Row ``i`` with one citing paper's pair contributions taken out.

    ``exclude`` is the sorted reference list of a citing paper already
    counted in the snapshot that lists ``i``: every neighbor in it loses one
    unit of weight and neighbors left at zero are dropped.
    """
    neighbors, weights = snapshot.row(i)
    if exclude is None or len(exclude) == 0:
        return neighbors, weights
    hit = np.isin(neighbors, exclude, assume_unique=True)
    adjusted = weights - hit.astype(weights.dtype)
    keep = adjusted > 0
    return neighbors[keep], adjusted[keep]


def co_cited_weights(
    snapshot: CoCitationSnapshot, paper: str, exclude: Iterable[str] = ()
) -> dict[str, int]:
    """Neighbor weights of ``paper``, optionally minus one citing paper's contribution.

    Args:
        snapshot: Snapshot that already counts the excluded citing paper.
        paper: Paper whose neighbors are wanted.
        exclude: Reference list of the citing paper to take out (usually the
            focal paper's own references). Must contain ``paper`` to have
            any effect.

    Returns:
        neighbor_id -> weight, in index order; empty for unknown papers.
    """
    i = snapshot.corpus.index.get(paper)
    if i is None:
        return {}
    excluded = sorted({snapshot.corpus.index[r] for r in exclude if r in snapshot.corpus.index})
    exclude_idx = np.asarray(excluded, dtype=np.int64) if i in excluded else None
    neighbors, weights = adjusted_row(snapshot, i, exclude_idx)
    return {snapshot.corpus.ids[j]: int(w) for j, w in zip(neighbors, weights, strict=True)}


# =============================================================================
# CACHE
# =============================================================================
# Same two-pickle layout as the corpus cache. Only the upper triangle is
# written, so every unordered pair is stored once on disk.


def save_snapshot(snapshot: CoCitationSnapshot, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    upper = sparse.triu(snapshot.adjacency, k=1).tocsr()
    header = {
        "format": SNAPSHOT_CACHE_FORMAT,
        "version": SNAPSHOT_CACHE_VERSION,
        "as_of_year": snapshot.as_of_year,
        "corpus": snapshot.corpus.fingerprint(),
    }
    with open(path, "wb") as f:
        pickle.dump(header, f, protocol=5)
        pickle.dump((upper.shape, upper.data, upper.indices, upper.indptr), f, protocol=5)
    logger.info(f"Snapshot {snapshot.as_of_year} cached at {path}")


def load_snapshot(path: Path, corpus: Corpus, as_of_year: int) -> CoCitationSnapshot:
    """Load a cached snapshot.

    Raises:
        CacheVersionError: If the file is missing, unreadable, from another
            version, another corpus, or another year.
    """
    if not path.exists():
        raise CacheVersionError(f"no snapshot cache at {path}")
    try:
        with open(path, "rb") as f:
            header = pickle.load(f)
            if not isinstance(header, dict) or header.get("format") != SNAPSHOT_CACHE_FORMAT:
                raise CacheVersionError(f"{path} is not a snapshot cache")
            if header.get("version") != SNAPSHOT_CACHE_VERSION:
                raise CacheVersionError(
                    f"snapshot cache version {header.get('version')} != {SNAPSHOT_CACHE_VERSION}"
                )
            if header.get("as_of_year") != as_of_year:
                raise CacheVersionError(
                    f"snapshot cache is for {header.get('as_of_year')}, wanted {as_of_year}"
                )
            if header.get("corpus") != corpus.fingerprint():
                raise CacheVersionError("snapshot cache was built from another corpus")
            shape, data, indices, indptr = pickle.load(f)
    except (pickle.UnpicklingError, EOFError, ValueError, TypeError) as e:
        raise CacheVersionError(f"unreadable snapshot cache {path}: {e}") from e
    upper = sparse.csr_matrix((data, indices, indptr), shape=shape)
    adjacency = (upper + upper.T).tocsr().astype(np.int32)
    return CoCitationSnapshot(corpus, as_of_year, adjacency)
