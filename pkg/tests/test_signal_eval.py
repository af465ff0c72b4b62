"""Tests for the planted-signal checks (eval.run_signal_eval).

Tests cover:
- Giant-rich papers form the high-G_5 group and gain the planted boost
- Disruptive papers lose their giant and sit at high DP
- Threshold checking of a metrics dict
"""

import numpy as np
import pytest

from app.metrics.table import metric_frame
from app.synthgen.models import GeneratorConfig, PlantedSignals
from eval.run_signal_eval import (
    THRESHOLDS,
    _pipeline,
    check_thresholds,
    giant_rich_config,
    giant_rich_recovery,
    no_giant_dp_shift,
)


@pytest.mark.integration
class TestGiantRichRecovery:
    """cohort_future_impact on a corpus with planted giant-rich papers."""

    @pytest.fixture(scope="class")
    def recovery(self) -> dict:
        config = giant_rich_config(6000, seed=1)
        return giant_rich_recovery(*_pipeline(config), config.planted.boost_factor)

    def test_high_group_is_planted(self, recovery: dict) -> None:
        assert recovery["high_group_size"] > 0
        assert recovery["high_group_planted_share"] >= 0.8

    def test_gain_ratio_matches_boost(self, recovery: dict) -> None:
        """High-G_5 papers gain the boost factor times the G_5 = 0 papers' citations, +/-20%."""
        assert recovery["cohort_gain_ratio"] / recovery["planted_boost_factor"] == pytest.approx(
            1.0, abs=0.2
        )


@pytest.mark.integration
class TestDisruptionRecovery:
    """disruption_profile on a corpus with planted disruptive papers."""

    @pytest.fixture(scope="class")
    def planted(self) -> tuple:
        config = GeneratorConfig(
            n_papers=3000,
            year_start=1990,
            year_end=2009,
            mean_refs=10.0,
            attachment=1.0,
            seed=3,
            planted=PlantedSignals(skip_fraction=0.1),
        )
        return _pipeline(config)

    def test_disruptive_papers_have_no_giant(self, planted: tuple) -> None:
        _, truth, giants, rows = planted
        assert no_giant_dp_shift(truth, giants, rows)["disruptive_no_giant_share"] >= 0.5

    def test_no_giant_group_sits_higher(self, planted: tuple) -> None:
        _, truth, giants, rows = planted
        shift = no_giant_dp_shift(truth, giants, rows)
        assert shift["mean_dp_no_giant"] > shift["mean_dp_giant"]

    def test_cited_disruptive_papers_in_high_bins(self, planted: tuple) -> None:
        """Cited disruptive papers without a giant sit in the upper half of DP."""
        _, truth, giants, rows = planted
        frame = metric_frame(rows).set_index("paper_id")
        no_giant = [p for p in truth.disruptive if p in giants and not giants[p].has_giant]
        cited = frame.loc[no_giant]
        cited = cited[(cited["C"] > 0) & cited["DP"].notna()]
        assert len(cited) > 0
        assert float(np.median(cited["DP"])) >= 50.0


class TestCheckThresholds:
    """Tests for check_thresholds()."""

    def test_all_met(self) -> None:
        assert check_thresholds(dict(THRESHOLDS)) == []

    def test_missing_and_low_values_fail(self) -> None:
        metrics = dict(THRESHOLDS)
        metrics.pop("matched_median_ratio")
        metrics["cohort_boost_recovery"] = 0.5
        failures = check_thresholds(metrics)
        assert len(failures) == 2
        assert any("cohort_boost_recovery" in f for f in failures)
