"""Shared test fixtures and configuration.

Most tests run on hand-built corpora small enough to check by hand. The
``giant_toy`` corpus is the worked voting instance used across modules:

    Focal paper F (2010) cites R1..R6 (2000). Earlier citing papers give,
    after F's own pairs are taken out:

        R1: R2 (3), R3 (2), R4 (1)
        R3: O (5), R1 (2)
        R4: O (5), R1 (1)
        R5: R6 (1)

    At n = 1 only (R1, R2) and (R5, R6) survive (<k> = 4/6). At n = 2 the
    votes of R3 and R4 reach R1, giving four edges (<k> = 8/6 > 1), so the
    search stops at n = 2 with giant R1 (degree 3). R3 is the most cited
    reference when F appears, so the giant is not the most cited one.
"""

import json
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path

import pytest

from app.core.config import IngestConfig, Settings
from app.corpus.index import Corpus
from app.corpus.schema import Author, PaperRecord, PubType
from app.synthgen.models import GeneratorConfig, PlantedSignals


def paper(
    paper_id: str,
    year: int,
    refs: Sequence[str] = (),
    *,
    pub_type: str = "article",
    field: str = "physics",
    authors: Sequence[str] = (),
    venue: str | None = None,
) -> PaperRecord:
    """Build a PaperRecord from compact arguments."""
    return PaperRecord(
        paper_id=paper_id,
        year=year,
        field=field,
        authors=tuple(Author.parse(a) for a in authors),
        pub_type=PubType.parse(pub_type),
        references=tuple(refs),
        venue=venue,
    )


def citers(prefix: str, year: int, refs: Sequence[str], count: int) -> list[PaperRecord]:
    """``count`` identical citing papers, ids ``<prefix>1..<prefix>count``."""
    return [paper(f"{prefix}{k}", year, refs) for k in range(1, count + 1)]


def giant_toy_records() -> list[PaperRecord]:
    refs = [f"R{k}" for k in range(1, 7)]
    records = [paper(r, 2000) for r in refs] + [paper("O", 2000)]
    records += citers("CA", 2005, ["R1", "R2"], 3)
    records += citers("CB", 2005, ["R1", "R3"], 2)
    records += citers("CC", 2005, ["R1", "R4"], 1)
    records += citers("CD", 2005, ["R3", "O"], 5)
    records += citers("CE", 2005, ["R4", "O"], 5)
    records += citers("CF", 2005, ["R5", "R6"], 1)
    records.append(paper("F", 2010, refs))
    return records


def write_jsonl(records: Iterable[PaperRecord | dict], path: Path) -> Path:
    """Write records (or raw dicts) in the JSON-lines corpus layout."""
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            if isinstance(record, PaperRecord):
                raw = {
                    "id": record.paper_id,
                    "year": record.year,
                    "field": record.field,
                    "pub_type": record.pub_type.value,
                    "authors": [str(a) for a in record.authors],
                    "references": list(record.references),
                }
                if record.venue:
                    raw["venue"] = record.venue
            else:
                raw = record
            f.write(json.dumps(raw) + "\n")
    return path


@pytest.fixture
def giant_toy() -> Corpus:
    """Indexed worked voting instance (see module docstring)."""
    return Corpus(giant_toy_records(), IngestConfig())


@pytest.fixture
def giant_toy_file(tmp_path: Path) -> Path:
    return write_jsonl(giant_toy_records(), tmp_path / "toy.jsonl")


@pytest.fixture
def corpus_writer(tmp_path: Path) -> Callable[[Iterable[PaperRecord | dict], str], Path]:
    """Write a JSON-lines corpus file under tmp_path."""

    def write(records: Iterable[PaperRecord | dict], name: str = "corpus.jsonl") -> Path:
        return write_jsonl(records, tmp_path / name)

    return write


@pytest.fixture
def small_synth_config() -> GeneratorConfig:
    """A few hundred papers over ten years, every planted signal switched on."""
    return GeneratorConfig(
        n_papers=240,
        year_start=2000,
        year_end=2009,
        mean_refs=7.0,
        attachment=1.0,
        dangling_rate=0.05,
        review_fraction=0.05,
        seed=11,
        planted=PlantedSignals(
            self_citation_rate=0.1, boost_fraction=0.05, boost_factor=3.0, skip_fraction=0.05
        ),
    )


@pytest.fixture
def run_settings(tmp_path: Path) -> Callable[..., Settings]:
    """Settings pointing every path under tmp_path."""

    def make(corpus_file: Path, **overrides: object) -> Settings:
        paths = {
            "corpus_file": corpus_file,
            "cache_dir": tmp_path / "cache",
            "output_dir": tmp_path / "out",
        }
        return Settings(paths=paths, **overrides)

    return make
