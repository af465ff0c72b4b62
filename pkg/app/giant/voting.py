"""Democratic voting on a focal paper's reference subnetwork.

Every reference votes for its top-n most co-cited papers in the global
snapshot; only votes that land on another reference of the same focal paper
are kept. The vote budget n grows until the average degree of the retained
subnetwork exceeds 1 (the percolation threshold), and the reference with
the most retained links becomes the giant.

Rather than rebuilding the subnetwork for n = 1, 2, ..., the rank of every
reference inside every other reference's neighbor list is computed once.
An undirected pair (a, b) enters the subnetwork at

    n_ab = min(rank of b in a's list, rank of a in b's list)

so edges(n) = {pairs with n_ab <= n} and the minimal crossing budget is read
off the sorted n_ab values.

Own-reference exclusion: the focal paper is counted in the snapshot of its
own year, and with exclusion on its pair contributions are taken out before
ranking. Only the pairs between its own references change (weight - 1), so
ranks are corrected with a few searchsorted calls on each cached ranked
list instead of re-sorting.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from app.cocite.snapshot import CoCitationSnapshot
from app.core.config import Damping
from app.giant.models import (
    GiantResult,
    ImportanceScore,
    ResultFlag,
    TieBreakDepth,
    VoteSubnetwork,
)

logger = logging.getLogger(__name__)


# =============================================================================
# VOTE RANKS
# =============================================================================


@dataclass(frozen=True)
class VoteRanks:
    """Entry budget of every candidate pair among one focal paper's references.

    Attributes:
        focal_id: Focal paper, if known.
        refs: Reference ids in corpus index order.
        pairs: (E, 2) positions into ``refs`` with a < b, one row per pair
            that is co-cited at all.
        first_n: (E,) smallest vote budget that retains each pair.
        pair_weights: (E,) co-citation weight of each pair after exclusion.
        list_lengths: (N,) neighbor list length of each reference.
        n_nodes: N used for the average degree.
    """

    focal_id: str | None
    refs: tuple[str, ...]
    pairs: np.ndarray
    first_n: np.ndarray
    pair_weights: np.ndarray
    list_lengths: np.ndarray
    n_nodes: int

    @property
    def exhausted_n(self) -> int:
        """Budget at which every reference has voted for its whole list."""
        return max(1, int(self.list_lengths.max(initial=0)))

    def subnetwork_at(self, n: int) -> VoteSubnetwork:
        if n < 1:
            raise ValueError(f"vote budget n must be >= 1, got {n}")
        keep = self.first_n <= n
        pairs = self.pairs[keep]
        weights = self.pair_weights[keep]
        degree_counts = np.bincount(pairs.ravel(), minlength=len(self.refs))
        edges = tuple((self.refs[a], self.refs[b]) for a, b in pairs)
        return VoteSubnetwork(
            focal_id=self.focal_id,
            refs=self.refs,
            n=n,
            edges=edges,
            edge_weights={e: int(w) for e, w in zip(edges, weights, strict=True)},
            degree={r: int(k) for r, k in zip(self.refs, degree_counts, strict=True)},
            n_nodes=self.n_nodes,
        )


def compute_vote_ranks(
    snapshot: CoCitationSnapshot,
    refs: Sequence[str],
    focal_id: str | None = None,
    exclude_own_refs: bool = False,
    count_isolated_in_n: bool = True,
) -> VoteRanks:
    """Rank every reference inside every other reference's neighbor list.

    Args:
        snapshot: Co-citation snapshot of the focal paper's publication year.
        refs: Resolved references of the focal paper.
        focal_id: Focal paper; required for own-reference exclusion.
        exclude_own_refs: Take the focal paper's own pair contributions out
            of the snapshot before ranking. Has no effect when the focal
            paper is newer than the snapshot.
        count_isolated_in_n: Count references without any co-citation
            neighbor in N.

    Raises:
        ValueError: If ``refs`` is empty or names a paper outside the corpus.
    """
    corpus = snapshot.corpus
    if not refs:
        raise ValueError("a vote subnetwork needs at least one reference")
    missing = [r for r in refs if r not in corpus.index]
    if missing:
        raise ValueError(f"references not in corpus: {missing[:5]}")

    ref_idx = np.unique(np.fromiter((corpus.index[r] for r in refs), dtype=np.int64))
    ref_ids = tuple(corpus.ids[i] for i in ref_idx)
    r = len(ref_idx)

    excluded = np.zeros(r, dtype=bool)
    if exclude_own_refs and focal_id is not None and focal_id in corpus.index:
        f = corpus.index[focal_id]
        if corpus.years[f] <= snapshot.as_of_year:
            excluded = np.isin(ref_idx, corpus.ref_indices(f))

    ranks = np.zeros((r, r), dtype=np.int64)
    adjusted_weights = np.zeros((r, r), dtype=np.int64)
    list_lengths = np.zeros(r, dtype=np.int64)

    for p, a in enumerate(ref_idx):
        neighbors, weights = snapshot.row(int(a))
        if len(neighbors) == 0:
            continue
        pos = np.minimum(np.searchsorted(neighbors, ref_idx), len(neighbors) - 1)
        w = np.where(neighbors[pos] == ref_idx, weights[pos], 0).astype(np.int64)
        w[p] = 0
        dec = excluded & excluded[p] & (w > 0)
        w_adj = w - dec

        listed, kept = w > 0, w_adj > 0
        full_keys = snapshot.ranked_keys(int(a))
        listed_keys = np.sort(snapshot.pack_keys(ref_idx[listed], w[listed]))
        kept_keys = snapshot.pack_keys(ref_idx[kept], w_adj[kept])
        # rank = 1 + untouched neighbors ahead + other references ahead
        ranks[p, kept] = (
            1
            + np.searchsorted(full_keys, kept_keys)
            - np.searchsorted(listed_keys, kept_keys)
            + np.searchsorted(np.sort(kept_keys), kept_keys)
        )
        adjusted_weights[p] = w_adj
        list_lengths[p] = len(full_keys) - int((listed & ~kept).sum())

    upper_a, upper_b = np.nonzero(np.triu(adjusted_weights > 0, k=1))
    pairs = np.column_stack([upper_a, upper_b]).astype(np.int64)
    first_n = np.minimum(ranks[upper_a, upper_b], ranks[upper_b, upper_a])
    n_nodes = r if count_isolated_in_n else int((list_lengths > 0).sum())
    return VoteRanks(
        focal_id=focal_id,
        refs=ref_ids,
        pairs=pairs.reshape(-1, 2),
        first_n=first_n,
        pair_weights=adjusted_weights[upper_a, upper_b],
        list_lengths=list_lengths,
        n_nodes=n_nodes,
    )


# =============================================================================
# SUBNETWORK AND STOP RULE
# =============================================================================


def build_vote_subnetwork(
    snapshot: CoCitationSnapshot,
    refs: Sequence[str],
    n: int,
    focal_id: str | None = None,
    exclude_own_refs: bool = False,
    count_isolated_in_n: bool = True,
) -> VoteSubnetwork:
    """Reference subnetwork retained when every reference casts ``n`` votes.

    Raises:
        ValueError: If ``n < 1`` or ``refs`` is empty.
    """
    if n < 1:
        raise ValueError(f"vote budget n must be >= 1, got {n}")
    ranks = compute_vote_ranks(snapshot, refs, focal_id, exclude_own_refs, count_isolated_in_n)
    return ranks.subnetwork_at(n)


def percolation_stop(ranks: VoteRanks) -> tuple[int, bool]:
    """Minimal budget with <k_n> > 1.

    Returns:
        (stop_n, percolation_reached). No edge at n = 1 stops at 1 without a
        crossing; a threshold that is never crossed stops at the exhausted
        budget.
    """
    if not np.any(ranks.first_n == 1):
        return 1, False
    budgets, counts = np.unique(ranks.first_n, return_counts=True)
    crossing = np.nonzero(2 * np.cumsum(counts) > ranks.n_nodes)[0]
    if crossing.size:
        return int(budgets[crossing[0]]), True
    return ranks.exhausted_n, False


def find_percolation_n(
    snapshot: CoCitationSnapshot,
    refs: Sequence[str],
    focal_id: str | None = None,
    exclude_own_refs: bool = False,
    count_isolated_in_n: bool = True,
) -> tuple[VoteSubnetwork, bool]:
    """Subnetwork at the minimal vote budget crossing the percolation threshold.

    Returns:
        The subnetwork at stop_n and whether <k_n> > 1 was reached.
    """
    ranks = compute_vote_ranks(snapshot, refs, focal_id, exclude_own_refs, count_isolated_in_n)
    stop_n, reached = percolation_stop(ranks)
    return ranks.subnetwork_at(stop_n), reached


# =============================================================================
# GIANT SELECTION
# =============================================================================


def retained_weights(sub: VoteSubnetwork) -> dict[str, int]:
    """w_i for every reference: co-citation weight summed over retained incident edges."""
    totals = dict.fromkeys(sub.refs, 0)
    for (a, b), w in sub.edge_weights.items():
        totals[a] += w
        totals[b] += w
    return totals


def identify_giant(sub: VoteSubnetwork, snapshot: CoCitationSnapshot) -> GiantResult:
    """Pick the reference with the most retained links.

    Ties go to the larger retained weight, then the older paper, then the
    smaller id. No retained edge means no giant.
    """
    corpus = snapshot.corpus
    weights = retained_weights(sub)
    result = GiantResult(
        focal_id=sub.focal_id or "",
        stop_n=sub.n,
        percolation_reached=sub.percolates,
        degrees=dict(sub.degree),
        weights=weights,
        n_refs=len(sub.refs),
        n_edges=sub.edge_count,
    )
    if sub.edge_count == 0:
        return result

    k_max = max(sub.degree.values())
    candidates = [r for r in sub.refs if sub.degree[r] == k_max]
    depth = TieBreakDepth.DEGREE
    if len(candidates) > 1:
        w_max = max(weights[r] for r in candidates)
        candidates = [r for r in candidates if weights[r] == w_max]
        depth = TieBreakDepth.WEIGHT
    if len(candidates) > 1:
        oldest = min(corpus.year_of(r) for r in candidates)
        candidates = [r for r in candidates if corpus.year_of(r) == oldest]
        depth = TieBreakDepth.YEAR
    if len(candidates) > 1:
        candidates = [min(candidates)]
        depth = TieBreakDepth.ID

    result.giant_id = candidates[0]
    result.tie_break_depth = depth
    if not result.percolation_reached:
        result.flags.append(ResultFlag.THRESHOLD_NOT_CROSSED)
    return result


# =============================================================================
# IMPORTANCE SCORES
# =============================================================================


def importance_scores(
    result: GiantResult, sub: VoteSubnetwork, damping: Damping = Damping.DELTA
) -> list[ImportanceScore]:
    """Importance score of every reference.

    With DELTA damping the giant scores 1 and everything else 0. LINEAR
    damping (f = 1) grades every reference and feeds ``top_k_giants``.

    Raises:
        ValueError: If the result has no giant (k_max == 0).
    """
    k_max = result.k_max
    if k_max == 0 or result.giant_id is None:
        raise ValueError(f"no importance scores for {result.focal_id!r}: it has no giant")

    best_weight_at_degree: dict[int, int] = {}
    for ref in sub.refs:
        k = result.degrees.get(ref, 0)
        best_weight_at_degree[k] = max(best_weight_at_degree.get(k, 0), result.weights.get(ref, 0))

    scores = []
    for ref in sub.refs:
        k_i = result.degrees.get(ref, 0)
        w_i = result.weights.get(ref, 0)
        w_ki_max = best_weight_at_degree[k_i]
        if damping == Damping.DELTA:
            f_value = 1.0 if ref == result.giant_id else 0.0
        else:
            f_value = 1.0
        weight_ratio = w_i / w_ki_max if w_ki_max else 0.0
        scores.append(
            ImportanceScore(
                ref=ref,
                s=(k_i / k_max) * weight_ratio * f_value,
                k_i=k_i,
                k_max=k_max,
                w_i=w_i,
                w_ki_max=w_ki_max,
                f_value=f_value,
            )
        )
    return scores


def top_k_giants(
    result: GiantResult, sub: VoteSubnetwork, k: int, snapshot: CoCitationSnapshot
) -> list[str]:
    """The ``k`` highest-scoring references under linear damping.

    Ordering: score, then degree, then retained weight, then older paper,
    then smaller id. The first entry is always the single giant.

    Raises:
        ValueError: If ``k < 1`` or the result has no giant.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scores = importance_scores(result, sub, Damping.LINEAR)
    index = snapshot.corpus.index
    ranked = sorted(scores, key=lambda s: (-s.s, -s.k_i, -s.w_i, index[s.ref]))
    return [s.ref for s in ranked[:k]]
