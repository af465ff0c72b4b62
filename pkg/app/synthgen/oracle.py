"""Brute-force reference implementation of giant assignment and metrics.

Everything here is recomputed from the raw corpus file with plain dicts,
sets and itertools, and shares no code with the indexed pipeline: the file
is parsed again, co-citation weights are counted pair by pair, and every
top-n vote list is rebuilt from scratch for n = 1, 2, ... . It is slow on
purpose and refuses corpora above a size cap.
"""

import csv
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from app.core.config import IngestConfig, InputFormat
from app.core.errors import OracleCapExceededError

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 2000

Pair = tuple[str, str]


@dataclass
class OracleResult:
    """Per-paper answers of the brute-force oracle.

    ``giants``, ``stop_n`` and ``percolation`` hold one entry per eligible
    focal paper; ``G``, ``C`` and ``D`` one entry per corpus paper.
    ``cocitation`` holds the pair weights as of the last corpus year, keyed
    by the sorted id pair.
    """

    giants: dict[str, str | None] = field(default_factory=dict)
    stop_n: dict[str, int] = field(default_factory=dict)
    percolation: dict[str, bool] = field(default_factory=dict)
    G: dict[str, int] = field(default_factory=dict)
    C: dict[str, int] = field(default_factory=dict)
    D: dict[str, float | None] = field(default_factory=dict)
    disruption_counts: dict[str, tuple[int, int, int]] = field(default_factory=dict)
    cocitation: dict[Pair, int] = field(default_factory=dict)


@dataclass
class _Paper:
    paper_id: str
    year: int
    pub_type: str
    refs: list[str]


# =============================================================================
# PARSING
# =============================================================================


def _read_raw(path: Path, input_format: InputFormat) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8", newline="") as f:
        if input_format == InputFormat.JSONL:
            for line in f:
                if line.strip():
                    rows.append(json.loads(line))
        else:
            for row in csv.DictReader(f, delimiter="\t", quoting=csv.QUOTE_NONE):
                refs = row.get("references") or ""
                row["references"] = refs.split(";")
                rows.append(row)
    return rows


def _read_papers(path: Path, input_format: InputFormat) -> list[_Paper]:
    papers = []
    seen = set()
    for raw in _read_raw(path, input_format):
        pid = str(raw.get("id", raw.get("paper_id"))).strip()
        if pid in seen:
            raise ValueError(f"duplicate paper id {pid!r}")
        seen.add(pid)
        refs = []
        for r in raw.get("references") or []:
            r = str(r).strip()
            if r and r not in refs:
                refs.append(r)
        pub_type = str(raw.get("pub_type") or "").strip().lower()
        papers.append(_Paper(pid, int(raw["year"]), pub_type, refs))
    return papers


# =============================================================================
# VOTING
# =============================================================================


def naive_giant(
    refs: list[str],
    weights: dict[str, dict[str, int]],
    years: dict[str, int],
    count_isolated_in_n: bool = True,
) -> tuple[str | None, int, bool]:
    """Giant of one focal paper from its (already adjusted) neighbor weights.

    Args:
        refs: The focal paper's resolved references.
        weights: paper -> {co-cited paper: weight}; zero weights are ignored.
        years: Publication year of every paper that appears in ``weights``.
        count_isolated_in_n: Count references without any neighbor in N.

    Returns:
        (giant or None, stop_n, percolation reached).
    """
    ref_set = set(refs)
    lists: dict[str, list[str]] = {}
    for a in refs:
        neighbors = [(x, w) for x, w in weights.get(a, {}).items() if w > 0 and x != a]
        neighbors.sort(key=lambda item: (-item[1], years[item[0]], item[0]))
        lists[a] = [x for x, _ in neighbors]

    if count_isolated_in_n:
        n_nodes = len(refs)
    else:
        n_nodes = len([a for a in refs if lists[a]])
    longest = max(len(v) for v in lists.values())

    n = 1
    reached = False
    while True:
        edges = set()
        for a in refs:
            for x in lists[a][:n]:
                if x in ref_set:
                    edges.add(tuple(sorted((a, x))))
        if n == 1 and not edges:
            return None, 1, False
        if 2 * len(edges) > n_nodes:
            reached = True
            break
        if n >= longest:
            break
        n += 1

    degree: Counter[str] = Counter()
    strength: Counter[str] = Counter()
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
        strength[a] += weights[a][b]
        strength[b] += weights[a][b]
    giant = min(refs, key=lambda r: (-degree[r], -strength[r], years[r], r))
    return giant, n, reached


# =============================================================================
# ORACLE
# =============================================================================


def oracle_giants(
    corpus_file: Path,
    ingest: IngestConfig | None = None,
    exclude_own_refs: bool = True,
    count_isolated_in_n: bool = True,
    cap: int = DEFAULT_ORACLE_CAP,
) -> OracleResult:
    """Recompute giants, G, C and D for a small corpus file by direct definitions.

    Raises:
        OracleCapExceededError: If the file holds more than ``cap`` papers.
    """
    ingest = ingest or IngestConfig()
    papers = _read_papers(corpus_file, ingest.input_format)
    if len(papers) > cap:
        raise OracleCapExceededError(f"oracle accepts at most {cap} papers, got {len(papers)}")
    papers = [p for p in papers if ingest.year_min <= p.year <= ingest.year_max]
    papers.sort(key=lambda p: (p.year, p.paper_id))
    years = {p.paper_id: p.year for p in papers}

    resolved: dict[str, list[str]] = {}
    listed: dict[str, int] = {}
    for p in papers:
        resolved[p.paper_id] = []
        listed[p.paper_id] = 0
        for r in p.refs:
            listed[p.paper_id] += 1
            if r in years and r != p.paper_id and years[r] <= p.year:
                resolved[p.paper_id].append(r)

    eligible_types = {t.strip().lower() for t in ingest.eligible_types}
    result = OracleResult()

    # co-citation weights grow year by year; focal papers of a year see every
    # citing paper published up to and including that year
    adjacency: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    by_year: dict[int, list[_Paper]] = defaultdict(list)
    for p in papers:
        by_year[p.year].append(p)
    for year in sorted(by_year):
        for p in by_year[year]:
            for a, b in combinations(resolved[p.paper_id], 2):
                adjacency[a][b] += 1
                adjacency[b][a] += 1
        for p in by_year[year]:
            pid = p.paper_id
            if p.pub_type not in eligible_types or listed[pid] < ingest.min_references:
                continue
            refs = resolved[pid]
            if not refs:
                result.giants[pid] = None
                result.stop_n[pid] = 1
                result.percolation[pid] = False
                continue
            weights = {a: dict(adjacency[a]) for a in refs}
            if exclude_own_refs:
                for a, b in combinations(refs, 2):
                    weights[a][b] -= 1
                    weights[b][a] -= 1
            giant, stop_n, reached = naive_giant(refs, weights, years, count_isolated_in_n)
            result.giants[pid] = giant
            result.stop_n[pid] = stop_n
            result.percolation[pid] = reached

    for a, row in adjacency.items():
        for b, w in row.items():
            if a < b and w > 0:
                result.cocitation[(a, b)] = w

    giant_counts = Counter(g for g in result.giants.values() if g is not None)
    citers: dict[str, set[str]] = defaultdict(set)
    for pid, refs in resolved.items():
        for r in refs:
            citers[r].add(pid)
    for p in papers:
        pid = p.paper_id
        result.G[pid] = giant_counts[pid]
        result.C[pid] = len(citers[pid])
        ref_citers = set()
        for r in resolved[pid]:
            for q in citers[r]:
                if q != pid and years[q] >= p.year:
                    ref_citers.add(q)
        n_j = len(citers[pid] & ref_citers)
        n_i = len(citers[pid]) - n_j
        n_k = len(ref_citers - citers[pid])
        total = n_i + n_j + n_k
        result.D[pid] = (n_i - n_j) / total if total else None
        result.disruption_counts[pid] = (n_i, n_j, n_k)

    logger.info(
        f"Oracle: {len(result.giants)} focal papers, "
        f"{sum(g is not None for g in result.giants.values())} with a giant"
    )
    return result
