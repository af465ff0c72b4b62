"""Tests for per-paper metrics.

Tests cover:
- Citation counts C and C_t
- Giant index G, G_t and the self-citation filter
- Disruption counts against a brute-force set computation
- Same-year disruption percentile
- Field/year normalization
- Metric table assembly and export
"""

from pathlib import Path

import pandas as pd
import pytest

from app.core.config import GNormCohort, MetricsSettings, SelfCitationMode, TableFormat
from app.core.tables import read_table
from app.corpus.index import Corpus
from app.corpus.schema import UNKNOWN_FIELD
from app.giant.driver import assign_all_giants
from app.metrics import disruption as disruption_module
from app.metrics.counts import citation_counts, giant_index, is_self_citation, self_citation_filter
from app.metrics.disruption import disruption, disruption_all, disruption_percentile
from app.metrics.models import MetricFlag, MetricRow
from app.metrics.table import (
    METRIC_COLUMNS,
    build_metric_rows,
    normalize_by_field_year,
    write_metric_table,
)
from app.synthgen.generator import generate_records
from app.synthgen.models import GeneratorConfig
from tests.conftest import giant_toy_records, paper


def brute_disruption(corpus: Corpus, pid: str) -> tuple[int, int, int]:
    """(n_i, n_j, n_k) from citer sets."""
    year = corpus.year_of(pid)
    refs = set(corpus.resolved_refs[pid])
    later = [
        q for q, r in corpus.resolved_refs.items() if q != pid and corpus.year_of(q) >= year
    ]
    n_i = n_j = n_k = 0
    for q in later:
        cites_p = pid in corpus.resolved_refs[q]
        cites_refs = bool(refs & set(corpus.resolved_refs[q]))
        if cites_p and cites_refs:
            n_j += 1
        elif cites_p:
            n_i += 1
        elif cites_refs:
            n_k += 1
    return n_i, n_j, n_k


@pytest.fixture(scope="module")
def synthetic() -> Corpus:
    records, _ = generate_records(
        GeneratorConfig(n_papers=300, year_start=2000, year_end=2007, mean_refs=5.0, seed=8)
    )
    return Corpus(records)


@pytest.fixture
def self_citing_toy() -> Corpus:
    """Toy corpus where F shares an author with its giant R1."""
    records = []
    for rec in giant_toy_records():
        if rec.paper_id == "R1":
            rec = paper("R1", 2000, authors=["J.Smith"])
        elif rec.paper_id == "F":
            rec = paper("F", 2010, rec.references, authors=["A.Other", "J. Smith"])
        records.append(rec)
    return Corpus(records)


class TestCitationCounts:
    """Tests for citation_counts()."""

    def test_total_and_windowed(self, giant_toy: Corpus) -> None:
        """R1 is cited six times in 2005 and once in 2010."""
        counts = citation_counts(giant_toy, window=5)
        assert counts["R1"] == (7, 6)
        assert counts["R3"] == (8, 7)
        assert counts["F"] == (0, 0)

    def test_no_window(self, giant_toy: Corpus) -> None:
        counts = citation_counts(giant_toy)
        assert all(c == ct for c, ct in counts.values())

    def test_window_includes_boundary_year(self, giant_toy: Corpus) -> None:
        """A citer exactly ``window`` years later is inside the window."""
        assert citation_counts(giant_toy, window=10)["R1"] == (7, 7)


class TestGiantIndex:
    """Tests for giant_index() and the self-citation filter."""

    def test_counts_giant_assignments(self, giant_toy: Corpus) -> None:
        results = assign_all_giants(giant_toy)
        g = giant_index(results, giant_toy)
        assert g["R1"] == (1, None)
        assert g["R2"] == (0, None)

    def test_window(self, giant_toy: Corpus) -> None:
        """F appears ten years after R1."""
        results = assign_all_giants(giant_toy)
        assert giant_index(results, giant_toy, window_t=5)["R1"] == (1, 0)
        assert giant_index(results, giant_toy, window_t=10)["R1"] == (1, 1)

    def test_sum_equals_papers_with_giant(self, synthetic: Corpus) -> None:
        """Every focal paper with a giant adds exactly one to G."""
        results = assign_all_giants(synthetic)
        g = giant_index(results, synthetic)
        assert sum(v[0] for v in g.values()) == sum(r.has_giant for r in results.values())

    def test_self_citation_detected(self, self_citing_toy: Corpus) -> None:
        """Author keys match across spellings of the same name."""
        assert is_self_citation(self_citing_toy, "F", "R1")
        assert not is_self_citation(self_citing_toy, "F", "R2")

    def test_self_citations_removed(self, self_citing_toy: Corpus) -> None:
        results = assign_all_giants(self_citing_toy)
        assert results["F"].giant_id == "R1"
        assert self_citation_filter(results, self_citing_toy)["R1"] == 0
        assert giant_index(results, self_citing_toy, exclude_self_citations=True)["R1"] == (0, None)
        assert giant_index(results, self_citing_toy)["R1"] == (1, None)

    def test_no_authors_never_self_citation(self, giant_toy: Corpus) -> None:
        assert not is_self_citation(giant_toy, "F", "R1")


class TestDisruption:
    """Tests for disruption() and disruption_all()."""

    @pytest.fixture
    def corpus(self) -> Corpus:
        return Corpus(
            [
                paper("R", 2000),
                paper("P", 2001, ["R"]),
                paper("A", 2002, ["P"]),
                paper("B", 2002, ["P"]),
                paper("C", 2002, ["P", "R"]),
                paper("K", 2002, ["R"]),
                paper("Z", 2002),
            ]
        )

    def test_worked_example(self, corpus: Corpus) -> None:
        """Two pure citers, one citer of both, one citer of the reference only."""
        assert disruption(corpus, "P") == (0.25, 2, 1, 1)

    def test_undefined_without_citers(self, corpus: Corpus) -> None:
        """A paper with no citers and no references has undefined D."""
        D, n_i, n_j, n_k = disruption(corpus, "Z")
        assert D is None
        assert (n_i, n_j, n_k) == (0, 0, 0)

    def test_paper_without_refs(self, corpus: Corpus) -> None:
        """With no references every citer is a pure citer."""
        assert disruption(corpus, "R") == (1.0, 3, 0, 0)

    def test_unknown_paper(self, corpus: Corpus) -> None:
        with pytest.raises(KeyError):
            disruption(corpus, "missing")

    def test_matches_brute_force(self, synthetic: Corpus) -> None:
        """Batched sparse counts equal citer-set counts."""
        computed = disruption_all(synthetic)
        for pid in synthetic.ids[::7]:
            assert computed[pid][1:] == brute_disruption(synthetic, pid)

    def test_batch_size_does_not_matter(
        self, synthetic: Corpus, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        full = disruption_all(synthetic)
        monkeypatch.setattr(disruption_module, "DISRUPTION_BATCH", 13)
        assert disruption_all(synthetic) == full

    def test_bounds(self, synthetic: Corpus) -> None:
        """D stays in [-1, 1]."""
        values = [d for d, *_ in disruption_all(synthetic).values() if d is not None]
        assert values
        assert all(-1.0 <= d <= 1.0 for d in values)


class TestDisruptionPercentile:
    """Tests for disruption_percentile()."""

    @pytest.fixture
    def corpus(self) -> Corpus:
        return Corpus([paper(f"P{k}", 2000) for k in range(5)] + [paper("Q", 2001)])

    def test_evenly_spaced(self, corpus: Corpus) -> None:
        """Five distinct values map to 0, 25, 50, 75, 100."""
        dp = disruption_percentile({"P0": 0.9, "P1": -0.5, "P2": 0.1, "P3": 0.0, "P4": 0.3}, corpus)
        assert dp == {"P1": 0.0, "P3": 25.0, "P2": 50.0, "P4": 75.0, "P0": 100.0}

    def test_full_tie(self, corpus: Corpus) -> None:
        """Tied values share the mean rank."""
        dp = disruption_percentile({f"P{k}": 0.2 for k in range(5)}, corpus)
        assert set(dp.values()) == {50.0}

    def test_single_paper_cohort(self, corpus: Corpus) -> None:
        assert disruption_percentile({"Q": -0.3}, corpus) == {"Q": 50.0}

    def test_undefined_left_out(self, corpus: Corpus) -> None:
        dp = disruption_percentile({"P0": None, "P1": 0.1, "P2": 0.2}, corpus)
        assert dp == {"P1": 0.0, "P2": 100.0}

    def test_years_ranked_separately(self, corpus: Corpus) -> None:
        dp = disruption_percentile({"P0": 0.5, "P1": 0.7, "Q": -1.0}, corpus)
        assert dp == {"P0": 0.0, "P1": 100.0, "Q": 50.0}


class TestNormalization:
    """Tests for normalize_by_field_year()."""

    @pytest.fixture
    def corpus(self) -> Corpus:
        refs = [f"B{k}" for k in range(5)]
        records = [paper(b, 2000) for b in refs]
        records += [paper("E1", 2001, refs), paper("E2", 2001, refs), paper("E3", 2001, refs, field=UNKNOWN_FIELD)]
        return Corpus(records)

    @pytest.fixture
    def rows(self, corpus: Corpus) -> list[MetricRow]:
        return [
            MetricRow(paper_id="B0", year=2000, field="physics", C=3),
            MetricRow(paper_id="E1", year=2001, field="physics", C=10, G=2),
            MetricRow(paper_id="E2", year=2001, field="physics", C=30, G=0),
            MetricRow(paper_id="E3", year=2001, field=corpus.field_of("E3"), C=5),
        ]

    def test_divides_by_cohort_mean(self, corpus: Corpus, rows: list[MetricRow]) -> None:
        """C = 10 and C = 30 normalize to 0.5 and 1.5."""
        out = {r.paper_id: r for r in normalize_by_field_year(rows, corpus)}
        assert out["E1"].C_norm == pytest.approx(0.5)
        assert out["E2"].C_norm == pytest.approx(1.5)

    def test_g_cohort_giants_only(self, corpus: Corpus, rows: list[MetricRow]) -> None:
        """By default the G mean runs over papers with G > 0."""
        out = {r.paper_id: r for r in normalize_by_field_year(rows, corpus)}
        assert out["E1"].G_norm == pytest.approx(1.0)
        assert out["E2"].G_norm == 0.0

    def test_g_cohort_all(self, corpus: Corpus, rows: list[MetricRow]) -> None:
        out = {r.paper_id: r for r in normalize_by_field_year(rows, corpus, GNormCohort.ALL)}
        assert out["E1"].G_norm == pytest.approx(2.0)

    def test_unknown_field_excluded(self, corpus: Corpus, rows: list[MetricRow]) -> None:
        out = {r.paper_id: r for r in normalize_by_field_year(rows, corpus)}
        assert out["E3"].C_norm is None
        assert MetricFlag.UNKNOWN_FIELD in out["E3"].flags

    def test_ineligible_not_normalized(self, corpus: Corpus, rows: list[MetricRow]) -> None:
        out = {r.paper_id: r for r in normalize_by_field_year(rows, corpus)}
        assert out["B0"].C_norm is None
        assert out["B0"].flags == []


class TestMetricTable:
    """Tests for build_metric_rows() and the exported table."""

    def test_one_row_per_paper(self, giant_toy: Corpus) -> None:
        rows = build_metric_rows(giant_toy, assign_all_giants(giant_toy), MetricsSettings())
        assert [r.paper_id for r in rows] == list(giant_toy.ids)
        by_id = {r.paper_id: r for r in rows}
        assert by_id["F"].eligible
        assert by_id["F"].has_giant is True
        assert by_id["F"].giant_id == "R1"
        assert by_id["R1"].has_giant is None
        assert (by_id["R1"].C, by_id["R1"].G) == (7, 1)

    def test_undefined_disruption_flagged(self, giant_toy: Corpus) -> None:
        """Nothing follows F: D and DP are undefined."""
        rows = build_metric_rows(giant_toy, assign_all_giants(giant_toy), MetricsSettings())
        f = next(r for r in rows if r.paper_id == "F")
        assert f.D is None
        assert f.DP is None
        assert MetricFlag.D_UNDEFINED in f.flags

    def test_self_citation_mode(self, self_citing_toy: Corpus) -> None:
        """EXCLUDE drops self-citing assignments from G but G_noself is always filtered."""
        results = assign_all_giants(self_citing_toy)
        kept = build_metric_rows(self_citing_toy, results, MetricsSettings())
        dropped = build_metric_rows(
            self_citing_toy, results, MetricsSettings(self_citations=SelfCitationMode.EXCLUDE)
        )
        r1_kept = next(r for r in kept if r.paper_id == "R1")
        r1_dropped = next(r for r in dropped if r.paper_id == "R1")
        assert (r1_kept.G, r1_kept.G_noself) == (1, 0)
        assert (r1_dropped.G, r1_dropped.G_noself) == (0, 0)

    @pytest.mark.parametrize("table_format", [TableFormat.TSV, TableFormat.JSONL])
    def test_export(self, giant_toy: Corpus, tmp_path: Path, table_format: TableFormat) -> None:
        """Undefined values are written as NA and read back as missing."""
        rows = build_metric_rows(giant_toy, assign_all_giants(giant_toy), MetricsSettings())
        path = write_metric_table(rows, tmp_path / f"metrics.{table_format.value}", table_format)
        assert "NA" in path.read_text()
        frame = read_table(path, table_format)
        assert list(frame.columns) == METRIC_COLUMNS
        assert len(frame) == len(giant_toy)
        f = frame[frame["paper_id"] == "F"].iloc[0]
        assert f["giant_id"] == "R1"
        assert pd.isna(f["D"])
