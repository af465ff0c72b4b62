"""Corpus ingestion: parse → validate → index → cache.

Input is newline-delimited, one paper per line, in one of two layouts:

JSON-lines (``--format jsonl``)::

    {"id": "W1", "year": 2001, "field": "physics", "pub_type": "article",
     "authors": ["J.Smith", "A.Doe"], "references": ["W0"], "venue": "PRL"}

TSV (``--format tsv``), with a header row::

    id  year  field  pub_type  authors  references  venue
    W1  2001  physics  article  J.Smith;A.Doe  W0  PRL

``venue`` and ``team_size`` are optional in both layouts. List cells in TSV
are ``;``-separated. Malformed lines and duplicate ids are hard errors that
carry the line number; anomalies in reference lists are only counted.

Run with: python -m app.main ingest --corpus data/corpus.jsonl
"""

import csv
import hashlib
import json
import logging
import pickle
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from app.core.config import IngestConfig, InputFormat
from app.core.errors import CacheVersionError, CorpusFormatError, DuplicatePaperError
from app.corpus.index import Corpus
from app.corpus.schema import UNKNOWN_FIELD, Author, LoadReport, PaperRecord, PubType

logger = logging.getLogger(__name__)

CORPUS_CACHE_FORMAT = "giant-lineage/corpus"
CORPUS_CACHE_VERSION = 1

TSV_COLUMNS = ["id", "year", "field", "pub_type", "authors", "references", "venue", "team_size"]
REQUIRED_TSV_COLUMNS = {"id", "year", "references"}


# =============================================================================
# PARSING
# =============================================================================


def file_sha256(path: Path) -> str:
    """SHA-256 of a file's bytes, streamed."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _dedupe(refs: Iterable[str]) -> tuple[tuple[str, ...], int]:
    seen: dict[str, None] = {}
    total = 0
    for ref in refs:
        ref = ref.strip()
        if not ref:
            continue
        total += 1
        seen.setdefault(ref, None)
    return tuple(seen), total - len(seen)


def _record_from_fields(raw: dict[str, Any], line_number: int) -> tuple[PaperRecord, int]:
    """Validate one raw mapping into a PaperRecord.

    Returns the record and the number of duplicate references removed.
    """
    paper_id = raw.get("id", raw.get("paper_id"))
    if paper_id is None or str(paper_id).strip() == "":
        raise CorpusFormatError("missing paper id", line_number)
    if raw.get("year") in (None, ""):
        raise CorpusFormatError(f"paper {paper_id!r} has no year", line_number)

    refs = raw.get("references") or []
    if not isinstance(refs, list):
        raise CorpusFormatError(f"references of {paper_id!r} must be a list", line_number)
    references, duplicates = _dedupe(str(r) for r in refs)

    authors_raw = raw.get("authors") or []
    if not isinstance(authors_raw, list):
        raise CorpusFormatError(f"authors of {paper_id!r} must be a list", line_number)
    try:
        authors = tuple(Author.parse(str(a)) for a in authors_raw if str(a).strip())
        team_size = raw.get("team_size")
        record = PaperRecord(
            paper_id=str(paper_id).strip(),
            year=int(raw["year"]),
            field=str(raw.get("field") or UNKNOWN_FIELD).strip() or UNKNOWN_FIELD,
            authors=authors,
            team_size=int(team_size) if team_size not in (None, "") else None,
            pub_type=PubType.parse(raw.get("pub_type")),
            references=references,
            venue=(str(raw["venue"]).strip() or None) if raw.get("venue") else None,
        )
    except (ValidationError, ValueError, TypeError) as e:
        raise CorpusFormatError(f"invalid record {paper_id!r}: {e}", line_number) from e
    return record, duplicates


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"invalid JSON: {e.msg}", line_number) from e
            if not isinstance(raw, dict):
                raise CorpusFormatError("expected a JSON object", line_number)
            yield line_number, raw


def _split_list(cell: str | None) -> list[str]:
    if not cell:
        return []
    return [part for part in cell.split(";") if part.strip()]


def _iter_tsv(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE)
        header: list[str] | None = None
        for line_number, row in enumerate(reader, 1):
            if not row or not any(cell.strip() for cell in row):
                continue
            if header is None:
                header = [c.strip().lower() for c in row]
                if header and header[0] == "paper_id":
                    header[0] = "id"
                missing = REQUIRED_TSV_COLUMNS - set(header)
                if missing:
                    raise CorpusFormatError(f"TSV header lacks columns {sorted(missing)}", line_number)
                continue
            if len(row) > len(header):
                raise CorpusFormatError(
                    f"expected at most {len(header)} columns, got {len(row)}", line_number
                )
            cells = dict(zip(header, row, strict=False))
            raw: dict[str, Any] = dict(cells)
            raw["authors"] = _split_list(cells.get("authors"))
            raw["references"] = _split_list(cells.get("references"))
            yield line_number, raw


def parse_records(path: Path, input_format: InputFormat) -> tuple[list[PaperRecord], LoadReport]:
    """Parse and validate every line of a corpus file.

    Raises:
        FileNotFoundError: If the file does not exist.
        CorpusFormatError: On the first malformed line.
        DuplicatePaperError: On the second occurrence of a paper id.
    """
    if not path.exists():
        raise FileNotFoundError(f"Corpus file not found: {path}")

    rows = _iter_jsonl(path) if input_format == InputFormat.JSONL else _iter_tsv(path)
    report = LoadReport()
    records: list[PaperRecord] = []
    first_seen: dict[str, int] = {}
    for line_number, raw in rows:
        record, duplicates = _record_from_fields(raw, line_number)
        if record.paper_id in first_seen:
            raise DuplicatePaperError(record.paper_id, line_number)
        first_seen[record.paper_id] = line_number
        report.duplicate_references += duplicates
        records.append(record)
    if report.duplicate_references:
        logger.warning(f"Removed {report.duplicate_references} repeated references within papers")
    return records, report


# =============================================================================
# LOADING
# =============================================================================


def load_corpus(papers_path: Path, config: IngestConfig) -> Corpus:
    """Load, validate and index a corpus file.

    Papers published outside [year_min, year_max] are skipped with a
    warning, which turns references to them into dangling references.

    Args:
        papers_path: JSON-lines or TSV corpus file.
        config: Format and eligibility settings.

    Returns:
        Fully indexed, read-only Corpus.
    """
    logger.info(f"Loading corpus from {papers_path} ({config.input_format.value})")
    records, report = parse_records(papers_path, config.input_format)

    in_range = [r for r in records if config.year_min <= r.year <= config.year_max]
    report.out_of_range_papers = len(records) - len(in_range)
    if report.out_of_range_papers:
        logger.warning(
            f"Skipped {report.out_of_range_papers} papers outside "
            f"[{config.year_min}, {config.year_max}]"
        )

    corpus = Corpus(in_range, config, report, source_sha256=file_sha256(papers_path))
    logger.info(f"Dangling references: {corpus.dangling_count}")
    return corpus


# =============================================================================
# WRITING
# =============================================================================


def _record_to_json(record: PaperRecord) -> dict[str, Any]:
    row: dict[str, Any] = {
        "id": record.paper_id,
        "year": record.year,
        "field": record.field,
        "pub_type": record.pub_type.value,
        "authors": [str(a) for a in record.authors],
        "references": list(record.references),
    }
    if record.venue:
        row["venue"] = record.venue
    if record.team_size is not None and not record.authors:
        row["team_size"] = record.team_size
    return row


def write_corpus(papers: Iterable[PaperRecord], path: Path, input_format: InputFormat) -> int:
    """Write papers in the corpus input format. Returns the number of lines written."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        if input_format == InputFormat.JSONL:
            for record in papers:
                f.write(json.dumps(_record_to_json(record), sort_keys=True) + "\n")
                count += 1
        else:
            writer = csv.writer(f, delimiter="\t", quoting=csv.QUOTE_NONE, lineterminator="\n")
            writer.writerow(TSV_COLUMNS)
            for record in papers:
                row = _record_to_json(record)
                writer.writerow(
                    [
                        row["id"],
                        row["year"],
                        row["field"],
                        row["pub_type"],
                        ";".join(row["authors"]),
                        ";".join(row["references"]),
                        row.get("venue", ""),
                        row.get("team_size", ""),
                    ]
                )
                count += 1
    logger.info(f"Wrote {count} papers to {path}")
    return count


# =============================================================================
# CACHE
# =============================================================================
# The cache file is two consecutive pickles: a small header dict, then the
# canonical corpus payload. The header is read and checked first so stale
# caches are rejected without unpickling the payload.


def save_corpus_cache(corpus: Corpus, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": CORPUS_CACHE_FORMAT,
        "version": CORPUS_CACHE_VERSION,
        "input_sha256": corpus.source_sha256,
        "ingest": corpus.ingest.model_dump(mode="json"),
    }
    with open(path, "wb") as f:
        pickle.dump(header, f, protocol=5)
        pickle.dump(corpus.to_bytes(), f, protocol=5)
    logger.info(f"Corpus cache written to {path}")


def load_corpus_cache(path: Path, input_sha256: str, config: IngestConfig) -> Corpus:
    """Load a cached corpus index.

    Raises:
        CacheVersionError: If the cache is missing, unreadable, from another
            format version, or built from another input file or config.
    """
    if not path.exists():
        raise CacheVersionError(f"no corpus cache at {path}")
    try:
        with open(path, "rb") as f:
            header = pickle.load(f)
            if not isinstance(header, dict) or header.get("format") != CORPUS_CACHE_FORMAT:
                raise CacheVersionError(f"{path} is not a corpus cache")
            if header.get("version") != CORPUS_CACHE_VERSION:
                raise CacheVersionError(
                    f"corpus cache version {header.get('version')} != {CORPUS_CACHE_VERSION}"
                )
            if header.get("input_sha256") != input_sha256:
                raise CacheVersionError("corpus cache was built from another input file")
            if header.get("ingest") != config.model_dump(mode="json"):
                raise CacheVersionError("corpus cache was built with other ingest settings")
            payload = pickle.load(f)
    except (pickle.UnpicklingError, EOFError, AttributeError) as e:
        raise CacheVersionError(f"unreadable corpus cache {path}: {e}") from e
    return Corpus.from_bytes(payload, source_sha256=input_sha256)


def load_or_build_corpus(papers_path: Path, config: IngestConfig, cache_path: Path) -> Corpus:
    """Reuse a valid cache, otherwise load the file and refresh the cache."""
    digest = file_sha256(papers_path)
    try:
        corpus = load_corpus_cache(cache_path, digest, config)
        logger.info(f"Corpus cache hit: {cache_path}")
        return corpus
    except CacheVersionError as e:
        logger.info(f"Rebuilding corpus index ({e})")
    corpus = load_corpus(papers_path, config)
    save_corpus_cache(corpus, cache_path)
    return corpus
