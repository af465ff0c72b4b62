"""Tests for corpus ingestion and the corpus index.

Tests cover:
- Author key parsing
- JSON-lines and TSV parsing, with line-numbered errors
- Dangling, future and self references
- Focal eligibility boundaries
- Transpose consistency and deterministic serialization
- The versioned corpus cache
"""

import pickle
from collections.abc import Callable
from pathlib import Path

import pytest

from app.core.config import IngestConfig, InputFormat
from app.core.errors import CacheVersionError, CorpusFormatError, DuplicatePaperError
from app.corpus.index import Corpus, eligible_focal_papers
from app.corpus.ingest import (
    load_corpus,
    load_corpus_cache,
    load_or_build_corpus,
    parse_records,
    save_corpus_cache,
    write_corpus,
)
from app.corpus.schema import Author, PubType
from tests.conftest import paper

Writer = Callable[..., Path]


def five_refs(prefix: str = "B") -> list[str]:
    return [f"{prefix}{k}" for k in range(5)]


class TestAuthor:
    """Tests for the (first initial, last name) key."""

    @pytest.mark.parametrize("raw", ["J.Smith", "J. Smith", "John Smith", "j.SMITH"])
    def test_parses_common_forms(self, raw: str) -> None:
        """All spellings reduce to the same lowercase key."""
        assert Author.parse(raw).key == ("j", "smith")

    def test_rejects_empty_last_name(self) -> None:
        """An author without a last name is malformed."""
        with pytest.raises(ValueError):
            Author.parse("J.")

    def test_unknown_pub_type_is_other(self) -> None:
        """Unrecognised type labels map to OTHER."""
        assert PubType.parse("Proceedings") == PubType.OTHER
        assert PubType.parse("Letter") == PubType.LETTER


class TestLoadCorpus:
    """Tests for load_corpus() on hand-written files."""

    def test_three_line_transpose(self, corpus_writer: Writer) -> None:
        """citing_index is the transpose of the reference lists."""
        path = corpus_writer([paper("A", 2000), paper("B", 2001, ["A"]), paper("C", 2002, ["A", "B"])])
        corpus = load_corpus(path, IngestConfig())
        assert corpus.citing_index["A"] == ["B", "C"]
        assert corpus.citing_index["B"] == ["C"]
        assert corpus.citing_index["C"] == []

    def test_dangling_reference_is_counted_not_indexed(self, corpus_writer: Writer) -> None:
        """An unknown id stays in the listed count but never enters the indexes."""
        path = corpus_writer(
            [paper("A", 2000), paper("B", 2001, ["A"]), paper("C", 2002, ["A", "B", "Z"])]
        )
        corpus = load_corpus(path, IngestConfig())
        assert corpus.dangling_count == 1
        assert "Z" not in corpus
        assert "Z" not in corpus.citing_index
        assert corpus.resolved_refs["C"] == ("A", "B")
        assert corpus.listed_ref_count["C"] == 3

    def test_future_reference_dropped(self, corpus_writer: Writer) -> None:
        """A reference to a later paper is dropped and reported."""
        path = corpus_writer([paper("A", 2000, ["B"]), paper("B", 2005)])
        corpus = load_corpus(path, IngestConfig())
        assert corpus.resolved_refs["A"] == ()
        assert corpus.report.future_references == 1

    def test_self_reference_dropped(self, corpus_writer: Writer) -> None:
        """A paper citing itself loses that reference."""
        path = corpus_writer([paper("A", 2000, ["A"])])
        corpus = load_corpus(path, IngestConfig())
        assert corpus.resolved_refs["A"] == ()
        assert corpus.report.self_references == 1

    def test_repeated_references_deduplicated(self, corpus_writer: Writer) -> None:
        """The same id listed twice counts once."""
        path = corpus_writer(
            [
                {"id": "A", "year": 2000, "references": []},
                {"id": "B", "year": 2001, "references": ["A", "A"]},
            ]
        )
        corpus = load_corpus(path, IngestConfig())
        assert corpus.resolved_refs["B"] == ("A",)
        assert corpus.report.duplicate_references == 1

    def test_missing_field_becomes_unknown(self, corpus_writer: Writer) -> None:
        """Papers without a field label get 'unknown'."""
        path = corpus_writer([{"id": "A", "year": 2000, "references": []}])
        assert load_corpus(path, IngestConfig()).field_of("A") == "unknown"

    def test_out_of_range_years_skipped(self, corpus_writer: Writer) -> None:
        """Papers outside [year_min, year_max] are skipped and counted."""
        path = corpus_writer([paper("A", 1950), paper("B", 2001, ["A"])])
        corpus = load_corpus(path, IngestConfig(year_min=2000))
        assert "A" not in corpus
        assert corpus.report.out_of_range_papers == 1
        assert corpus.dangling_count == 1

    def test_malformed_json_reports_line(self, tmp_path: Path) -> None:
        """A broken line is a hard error naming its line number."""
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "A", "year": 2000}\n{"id": "B", "year": \n')
        with pytest.raises(CorpusFormatError) as exc:
            load_corpus(path, IngestConfig())
        assert exc.value.line_number == 2

    def test_missing_year_reports_line(self, corpus_writer: Writer) -> None:
        """A record without a year is malformed."""
        path = corpus_writer([{"id": "A", "year": 2000}, {"id": "B", "references": []}])
        with pytest.raises(CorpusFormatError, match="line 2"):
            load_corpus(path, IngestConfig())

    def test_duplicate_id_is_hard_error(self, corpus_writer: Writer) -> None:
        """A repeated paper id stops the load."""
        path = corpus_writer([paper("A", 2000), paper("B", 2001), paper("A", 2002)])
        with pytest.raises(DuplicatePaperError) as exc:
            load_corpus(path, IngestConfig())
        assert exc.value.paper_id == "A"
        assert exc.value.line_number == 3

    def test_missing_file(self, tmp_path: Path) -> None:
        """A missing corpus file raises FileNotFoundError."""
        with pytest.raises(FileNotFoundError):
            load_corpus(tmp_path / "absent.jsonl", IngestConfig())


class TestTsv:
    """Tests for the TSV layout."""

    def test_reads_tsv_with_list_cells(self, tmp_path: Path) -> None:
        """Authors and references are ;-separated cells."""
        path = tmp_path / "corpus.tsv"
        path.write_text(
            "id\tyear\tfield\tpub_type\tauthors\treferences\tvenue\n"
            "A\t2000\tphysics\tarticle\tJ.Smith\t\tPRL\n"
            "B\t2001\tphysics\tletter\tJ.Smith;A.Doe\tA\t\n"
        )
        records, _ = parse_records(path, InputFormat.TSV)
        assert records[1].references == ("A",)
        assert records[1].team_size == 2
        assert records[1].pub_type == PubType.LETTER
        assert records[0].venue == "PRL"

    def test_header_without_references_rejected(self, tmp_path: Path) -> None:
        """The header must name id, year and references."""
        path = tmp_path / "corpus.tsv"
        path.write_text("id\tyear\nA\t2000\n")
        with pytest.raises(CorpusFormatError, match="line 1"):
            parse_records(path, InputFormat.TSV)

    def test_write_then_read_keeps_indexes(self, tmp_path: Path) -> None:
        """Writing records as TSV and loading them gives the same index as JSON-lines."""
        records = [
            paper("A", 2000, authors=["J.Smith"]),
            paper("B", 2001, ["A"], authors=["A.Doe", "B.Roe"], venue="V"),
            paper("C", 2002, ["A", "B", "Z"], pub_type="review"),
        ]
        tsv = tmp_path / "c.tsv"
        jsonl = tmp_path / "c.jsonl"
        write_corpus(records, tsv, InputFormat.TSV)
        write_corpus(records, jsonl, InputFormat.JSONL)
        a = load_corpus(tsv, IngestConfig(input_format=InputFormat.TSV))
        b = load_corpus(jsonl, IngestConfig())
        assert a.citing_index == b.citing_index
        assert a.papers == b.papers


class TestEligibility:
    """Tests for eligible_focal_papers()."""

    def _corpus(self) -> Corpus:
        base = [paper(r, 1990) for r in five_refs()]
        return Corpus(
            base
            + [
                paper("four", 2000, five_refs()[:4]),
                paper("five", 2000, five_refs()),
                paper("letter", 2001, five_refs(), pub_type="letter"),
                paper("review", 2001, five_refs() + [f"X{k}" for k in range(45)], pub_type="review"),
                paper("dangling", 2002, ["B0", "B1", "Y1", "Y2", "Y3"]),
            ]
        )

    def test_four_references_excluded(self) -> None:
        """Four references fall below the threshold."""
        assert "four" not in eligible_focal_papers(self._corpus())

    def test_five_references_included(self) -> None:
        """Five references of an article meet the threshold."""
        assert "five" in eligible_focal_papers(self._corpus())

    def test_review_excluded(self) -> None:
        """Reviews are never focal papers, however long their lists."""
        assert "review" not in eligible_focal_papers(self._corpus())

    def test_dangling_references_count(self) -> None:
        """Listed references outside the corpus count toward the threshold."""
        assert "dangling" in eligible_focal_papers(self._corpus())

    def test_future_reference_counts_toward_threshold(self) -> None:
        """A dropped future reference loses its edge but stays in the listed count."""
        corpus = Corpus(
            [paper(r, 2000) for r in ("R0", "R1", "R2", "R3")]
            + [paper("LATE", 2005), paper("F", 2001, ["R0", "R1", "R2", "R3", "LATE"])]
        )
        assert corpus.resolved_refs["F"] == ("R0", "R1", "R2", "R3")
        assert corpus.listed_ref_count["F"] == 5
        assert corpus.report.future_references == 1
        assert "F" in eligible_focal_papers(corpus)

    def test_self_reference_counts_toward_threshold(self) -> None:
        """A paper listing itself keeps that entry in the listed count."""
        corpus = Corpus(
            [paper(r, 2000) for r in ("R0", "R1", "R2", "R3")]
            + [paper("F", 2001, ["R0", "R1", "R2", "R3", "F"])]
        )
        assert corpus.listed_ref_count["F"] == 5
        assert "F" in eligible_focal_papers(corpus)

    def test_sorted_and_filtered_by_year(self) -> None:
        """Output is in (year, id) order and respects the year range."""
        corpus = self._corpus()
        assert eligible_focal_papers(corpus) == ["five", "letter", "dangling"]
        assert eligible_focal_papers(corpus, (2001, 2001)) == ["letter"]
        assert eligible_focal_papers(corpus, (2010, 2020)) == []

    def test_matches_linear_scan(self) -> None:
        """Eligibility equals an independent scan of the three predicates."""
        corpus = self._corpus()
        expected = sorted(
            (rec.year, pid)
            for pid, rec in corpus.papers.items()
            if rec.pub_type in (PubType.ARTICLE, PubType.LETTER) and len(rec.references) >= 5
        )
        assert eligible_focal_papers(corpus) == [pid for _, pid in expected]


class TestIndex:
    """Tests for index invariants."""

    def test_transpose_consistency(self, giant_toy: Corpus) -> None:
        """Every resolved edge appears in the citing index and totals agree."""
        for pid, refs in giant_toy.resolved_refs.items():
            for ref in refs:
                assert pid in giant_toy.citing_index[ref]
        total_refs = sum(len(r) for r in giant_toy.resolved_refs.values())
        assert sum(len(c) for c in giant_toy.citing_index.values()) == total_refs

    def test_index_order_is_year_then_id(self, giant_toy: Corpus) -> None:
        """Dense indices follow (year, paper_id)."""
        keys = [(giant_toy.year_of(pid), pid) for pid in giant_toy.ids]
        assert keys == sorted(keys)

    def test_serialization_deterministic(self, giant_toy_file: Path) -> None:
        """Loading the same file twice gives byte-identical serializations."""
        a = load_corpus(giant_toy_file, IngestConfig())
        b = load_corpus(giant_toy_file, IngestConfig())
        assert a.to_bytes() == b.to_bytes()

    def test_from_bytes_round_trip(self, giant_toy: Corpus) -> None:
        """A deserialized corpus serializes to the same bytes."""
        assert Corpus.from_bytes(giant_toy.to_bytes()).to_bytes() == giant_toy.to_bytes()


class TestCorpusCache:
    """Tests for the versioned corpus cache."""

    def test_round_trip(self, giant_toy_file: Path, tmp_path: Path) -> None:
        """A saved cache loads back into the same corpus."""
        corpus = load_corpus(giant_toy_file, IngestConfig())
        cache = tmp_path / "cache" / "corpus.pkl"
        save_corpus_cache(corpus, cache)
        loaded = load_corpus_cache(cache, corpus.source_sha256, IngestConfig())
        assert loaded.to_bytes() == corpus.to_bytes()

    def test_rejects_other_input(self, giant_toy_file: Path, tmp_path: Path) -> None:
        """A cache built from another file is stale."""
        corpus = load_corpus(giant_toy_file, IngestConfig())
        cache = tmp_path / "corpus.pkl"
        save_corpus_cache(corpus, cache)
        with pytest.raises(CacheVersionError):
            load_corpus_cache(cache, "0" * 64, IngestConfig())

    def test_rejects_other_ingest_settings(self, giant_toy_file: Path, tmp_path: Path) -> None:
        """A cache built with other eligibility settings is stale."""
        corpus = load_corpus(giant_toy_file, IngestConfig())
        cache = tmp_path / "corpus.pkl"
        save_corpus_cache(corpus, cache)
        with pytest.raises(CacheVersionError):
            load_corpus_cache(cache, corpus.source_sha256, IngestConfig(min_references=3))

    def test_rejects_other_version(self, giant_toy_file: Path, tmp_path: Path) -> None:
        """A header from another format version is refused."""
        corpus = load_corpus(giant_toy_file, IngestConfig())
        cache = tmp_path / "corpus.pkl"
        with open(cache, "wb") as f:
            pickle.dump({"format": "giant-lineage/corpus", "version": 999}, f)
            pickle.dump(corpus.to_bytes(), f)
        with pytest.raises(CacheVersionError, match="version"):
            load_corpus_cache(cache, corpus.source_sha256, IngestConfig())

    def test_corrupted_cache_is_rebuilt(self, giant_toy_file: Path, tmp_path: Path) -> None:
        """Garbage in the cache file triggers a rebuild instead of a crash."""
        cache = tmp_path / "corpus.pkl"
        cache.write_bytes(b"\x00garbage")
        corpus = load_or_build_corpus(giant_toy_file, IngestConfig(), cache)
        assert len(corpus) == 25
        assert load_corpus_cache(cache, corpus.source_sha256, IngestConfig()).to_bytes() == (
            corpus.to_bytes()
        )
