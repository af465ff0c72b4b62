"""Seeded synthetic citation corpora.

Papers are spread evenly over the configured years. Each paper cites only
papers of strictly earlier years, chosen without replacement with
probability proportional to (citations so far + 1) ** attachment. Citation
counts are refreshed once per year, so papers of the same year see the same
attachment weights.

Planted signals (all labeled in the ground-truth sidecar):
- boosted (giant-rich) papers go through a lineage phase of
  ``boost_delay`` years: they are cited ``lineage_factor`` times as often
  and every citer that is not itself disruptive also lists two of their
  first three references, which makes them the giant of most of their
  early citers. After the lineage phase their attachment weight is
  multiplied by ``boost_factor``;
- disruptive papers cite only papers nobody has cited yet, so their
  references start out never co-cited, and they are never co-cited with any
  of their own references afterwards;
- self-citing papers copy one author of one of their references.

Run with: python -m app.main synth --config synth.toml --out data/synth
"""

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from pydantic import BaseModel
from tqdm import tqdm

from app.core.config import TOOL_VERSION, InputFormat
from app.core.errors import InfeasibleConfigError
from app.core.tables import write_json
from app.corpus.ingest import file_sha256, write_corpus
from app.corpus.schema import Author, PaperRecord, PubType
from app.synthgen.models import GeneratorConfig, GroundTruth, RefDist, TeamSizeDist

logger = logging.getLogger(__name__)

# Redraw rounds before falling back to an exact weighted draw
MAX_REJECTION_ROUNDS = 20

# A giant-rich paper's first LINEAGE_POOL references; each citer in the
# lineage phase lists LINEAGE_COMPANIONS of them
LINEAGE_POOL = 3
LINEAGE_COMPANIONS = 2


class SynthOutput(BaseModel):
    """Files written by ``generate``."""

    corpus_file: Path
    truth_file: Path
    manifest_file: Path
    papers: int
    config_hash: str


def gini(values: Sequence[float] | np.ndarray) -> float:
    """Gini coefficient of non-negative values (0 = equal, towards 1 = concentrated).

    An empty or all-zero input gives 0.0.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    n = len(x)
    total = x.sum()
    if n == 0 or total == 0:
        return 0.0
    ranks = np.arange(1, n + 1)
    return float(2.0 * np.dot(ranks, x) / (n * total) - (n + 1) / n)


# =============================================================================
# SAMPLING
# =============================================================================


def _papers_per_year(config: GeneratorConfig) -> np.ndarray:
    base, extra = divmod(config.n_papers, config.n_years)
    counts = np.full(config.n_years, base, dtype=np.int64)
    counts[config.n_years - extra :] += 1
    return counts


def _check_feasible(config: GeneratorConfig) -> None:
    per_year = config.n_papers // config.n_years
    needed = math.ceil(config.mean_refs)
    if per_year < needed:
        raise InfeasibleConfigError(
            f"{config.n_papers} papers over {config.n_years} years leaves {per_year} per year, "
            f"too few to fill reference lists of mean length {config.mean_refs}"
        )


def _ref_counts(rng: np.random.Generator, config: GeneratorConfig, size: int) -> np.ndarray:
    if config.ref_dist == RefDist.FIXED:
        return np.full(size, max(1, round(config.mean_refs)), dtype=np.int64)
    return 1 + rng.poisson(max(0.0, config.mean_refs - 1.0), size=size)


def _team_sizes(rng: np.random.Generator, config: GeneratorConfig, size: int) -> np.ndarray:
    top = config.max_team_size
    if config.team_size_dist == TeamSizeDist.UNIFORM:
        return rng.integers(1, top + 1, size=size)
    return np.minimum(rng.geometric(0.3, size=size), top)


def _sample_refs(
    rng: np.random.Generator,
    cumulative: np.ndarray,
    k: int,
    refs_of: dict[int, list[int]],
    disruptive: np.ndarray,
) -> list[int]:
    """Draw up to k distinct earlier papers by attachment weight.

    A disruptive paper and any of its own references are never both chosen;
    whichever is drawn first wins.
    """
    pool = len(cumulative)
    total = cumulative[-1]
    chosen: list[int] = []
    taken: set[int] = set()
    banned: set[int] = set()
    for _ in range(MAX_REJECTION_ROUNDS):
        draws = np.searchsorted(cumulative, rng.random(2 * (k - len(chosen))) * total, side="right")
        for j in np.minimum(draws, pool - 1).tolist():
            if j in taken or j in banned:
                continue
            if disruptive[j]:
                own = refs_of[j]
                if taken.intersection(own):
                    continue
                banned.update(own)
            chosen.append(j)
            taken.add(j)
            if len(chosen) == k:
                return chosen
    # Heavily skewed weights or a nearly exhausted pool: finish with an exact draw
    weights = np.diff(cumulative, prepend=0.0)
    free = np.array(
        [j for j in range(pool) if weights[j] > 0 and j not in taken and j not in banned],
        dtype=np.int64,
    )
    if len(free):
        p = weights[free] / weights[free].sum()
        for j in rng.choice(free, size=min(k - len(chosen), len(free)), replace=False, p=p).tolist():
            if j in banned or (disruptive[j] and taken.intersection(refs_of[j])):
                continue
            if disruptive[j]:
                banned.update(refs_of[j])
            chosen.append(j)
            taken.add(j)
    return chosen


def _add_lineage(
    rng: np.random.Generator,
    chosen: list[int],
    lineage: np.ndarray,
    refs_of: dict[int, list[int]],
    disruptive: np.ndarray,
) -> list[int]:
    """Put companions next to every lineage-phase paper in ``chosen``.

    Companions come from the paper's first ``LINEAGE_POOL`` references and
    replace the last drawn ordinary references, so the list keeps its length.
    Disruptive papers and references banned by a chosen disruptive paper are
    never used as companions.
    """
    anchors = [j for j in chosen if lineage[j]]
    if not anchors:
        return chosen
    taken = set(chosen)
    banned = {r for j in chosen if disruptive[j] for r in refs_of[j]}
    extra: list[int] = []
    room = len(chosen) - len(anchors)
    for b in anchors:
        pool = [
            r
            for r in refs_of[b][:LINEAGE_POOL]
            if r not in taken and r not in banned and not disruptive[r]
        ]
        if not pool or room <= 0:
            continue
        picks = rng.choice(len(pool), size=min(LINEAGE_COMPANIONS, len(pool), room), replace=False)
        for p in sorted(picks.tolist()):
            extra.append(pool[p])
            taken.add(pool[p])
        room -= len(picks)
    rest = [j for j in chosen if not lineage[j]][: max(0, len(chosen) - len(anchors) - len(extra))]
    return anchors + extra + rest


# =============================================================================
# GENERATION
# =============================================================================


def generate_records(
    config: GeneratorConfig, show_progress: bool = False
) -> tuple[list[PaperRecord], GroundTruth]:
    """Generate papers in (year, id) order together with their ground truth.

    Raises:
        InfeasibleConfigError: If a year holds fewer papers than ``mean_refs``.
    """
    _check_feasible(config)
    rng = np.random.default_rng(config.seed)
    planted = config.planted
    n = config.n_papers

    per_year = _papers_per_year(config)
    years = np.repeat(np.arange(config.year_start, config.year_end + 1), per_year)
    ids = [f"P{i:06d}" for i in range(n)]
    fields = rng.integers(0, config.field_count, size=n)
    venues = rng.integers(0, 3, size=n)
    team = _team_sizes(rng, config, n)
    kinds = rng.random(n)
    boosted = rng.random(n) < planted.boost_fraction
    disruptive = (rng.random(n) < planted.skip_fraction) & ~boosted
    n_refs = _ref_counts(rng, config, n)

    authors: list[list[str]] = []
    serial = 0
    for m in team.tolist():
        names = []
        for _ in range(m):
            names.append(f"{chr(ord('A') + serial % 26)}.Author{serial}")
            serial += 1
        authors.append(names)

    citations = np.zeros(n, dtype=np.float64)
    refs_of: dict[int, list[int]] = {}
    dangling: dict[int, list[str]] = {}
    truth = GroundTruth(
        boosted=[ids[i] for i in np.flatnonzero(boosted)],
        disruptive=[ids[i] for i in np.flatnonzero(disruptive)],
    )

    starts = np.concatenate([[0], np.cumsum(per_year)])
    cumulative = np.zeros(0)
    fresh = np.zeros(0, dtype=np.int64)
    lineage = np.zeros(n, dtype=bool)
    for y_pos in tqdm(range(config.n_years), desc="Synth", unit="year", disable=not show_progress):
        lo, hi = int(starts[y_pos]), int(starts[y_pos + 1])
        year = config.year_start + y_pos
        if lo > 0:
            weights = (citations[:lo] + 1.0) ** config.attachment
            lineage[:lo] = boosted[:lo] & (years[:lo] + planted.boost_delay > year)
            weights[lineage[:lo]] *= planted.lineage_factor
            active = boosted[:lo] & (years[:lo] + planted.boost_delay <= year)
            weights[active] *= planted.boost_factor
            cumulative = np.cumsum(weights)
            fresh = np.flatnonzero(citations[:lo] == 0)
        year_refs: list[int] = []
        for i in range(lo, hi):
            k = int(n_refs[i])
            n_out = int(rng.binomial(k, config.dangling_rate)) if config.dangling_rate else 0
            internal = min(k - n_out, lo)
            if internal <= 0:
                refs = []
            elif disruptive[i] and len(fresh):
                # uncited papers, each handed to one disruptive paper per year
                size = min(internal, len(fresh))
                picks = np.sort(rng.choice(len(fresh), size=size, replace=False))
                refs = fresh[picks].tolist()
                fresh = np.delete(fresh, picks)
            else:
                refs = _sample_refs(rng, cumulative, internal, refs_of, disruptive)
                refs = _add_lineage(rng, refs, lineage, refs_of, disruptive)
            refs_of[i] = refs
            dangling[i] = [f"X{i:06d}.{d}" for d in range(n_out)]
            year_refs.extend(refs)

            if refs and rng.random() < planted.self_citation_rate:
                source = refs[int(rng.integers(len(refs)))]
                copied = authors[source][int(rng.integers(len(authors[source])))]
                authors[i][-1] = copied
                truth.self_citation_pairs.append((ids[i], ids[source]))
        np.add.at(citations, np.asarray(year_refs, dtype=np.int64), 1.0)

    records = []
    for i in range(n):
        kind = kinds[i]
        if kind < config.review_fraction:
            pub_type = PubType.REVIEW
        elif kind < config.review_fraction + config.letter_fraction:
            pub_type = PubType.LETTER
        else:
            pub_type = PubType.ARTICLE
        field = f"F{int(fields[i])}"
        records.append(
            PaperRecord(
                paper_id=ids[i],
                year=int(years[i]),
                field=field,
                authors=tuple(Author.parse(a) for a in authors[i]),
                pub_type=pub_type,
                references=tuple(ids[j] for j in refs_of[i]) + tuple(dangling[i]),
                venue=f"{field}-J{int(venues[i])}",
            )
        )
    logger.info(
        f"Generated {n:,} papers over {config.n_years} years, "
        f"{sum(len(r) for r in refs_of.values()):,} citations (seed {config.seed})"
    )
    return records, truth


def generate(
    config: GeneratorConfig,
    out_dir: Path,
    input_format: InputFormat = InputFormat.JSONL,
    show_progress: bool = False,
) -> SynthOutput:
    """Generate a corpus and write it with its ground truth and manifest.

    Writes ``corpus.<jsonl|tsv>``, ``corpus.truth.json`` and
    ``corpus.manifest.json`` under ``out_dir``. The same config always
    produces byte-identical files.
    """
    records, truth = generate_records(config, show_progress=show_progress)
    corpus_file = out_dir / f"corpus.{input_format.value}"
    count = write_corpus(records, corpus_file, input_format)
    truth_file = write_json(truth.model_dump(mode="json"), out_dir / "corpus.truth.json")
    manifest_file = write_json(
        {
            "stage": "synth",
            "tool_version": TOOL_VERSION,
            "config": config.model_dump(mode="json"),
            "config_hash": config.config_hash(),
            "format": input_format.value,
            "papers": count,
            "corpus_sha256": file_sha256(corpus_file),
        },
        out_dir / "corpus.manifest.json",
    )
    return SynthOutput(
        corpus_file=corpus_file,
        truth_file=truth_file,
        manifest_file=manifest_file,
        papers=count,
        config_hash=config.config_hash(),
    )
