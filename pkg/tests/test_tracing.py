"""Tests for the tracing helpers (app.core.tracing).

Tests cover:
- observe() leaves stage functions untouched when observability is off
- observe() hands over to langfuse.observe when on
- init_tracing() creates the Langfuse client only with keys present
- flush_tracing() and the LANGFUSE_* environment bridge
- Missing langfuse installs degrade to no-ops
"""

import builtins
import os
from collections.abc import Iterator
from unittest.mock import MagicMock, patch

import pytest

from app.core.config import ObservabilitySettings
from app.core.tracing import _export_langfuse_env, flush_tracing, init_tracing, observe
from app.pipeline.graph import NODES
from app.pipeline.models import Stage

_real_import = builtins.__import__


def _import_without_langfuse(name: str, *args, **kwargs):  # type: ignore[no-untyped-def]
    if name.startswith("langfuse"):
        raise ImportError("No module named 'langfuse'")
    return _real_import(name, *args, **kwargs)


@pytest.fixture
def tracing_on() -> Iterator[MagicMock]:
    with patch("app.core.tracing.settings") as mock_settings:
        mock_settings.observability.enabled = True
        mock_settings.observability.langfuse_public_key = "pk-test"
        mock_settings.observability.langfuse_secret_key = "sk-test"
        mock_settings.observability.langfuse_base_url = "https://cloud.langfuse.com"
        yield mock_settings


class TestObserve:
    """Tests for observe()."""

    def test_disabled_returns_same_function(self) -> None:
        with patch("app.core.tracing.settings") as mock_settings:
            mock_settings.observability.enabled = False

            def count_refs(refs: list[str]) -> int:
                return len(refs)

            assert observe(name="count_refs")(count_refs) is count_refs
            assert count_refs(["R1", "R2"]) == 2

    def test_enabled_delegates(self, tracing_on: MagicMock) -> None:
        """Stage state is not captured unless asked for."""
        langfuse_observe = MagicMock()
        with patch("langfuse.observe", langfuse_observe):
            decorator = observe(name="stage_giants")
        langfuse_observe.assert_called_once_with(
            name="stage_giants", capture_input=False, capture_output=False
        )
        assert decorator is langfuse_observe.return_value

    def test_capture_can_be_requested(self, tracing_on: MagicMock) -> None:
        langfuse_observe = MagicMock()
        with patch("langfuse.observe", langfuse_observe):
            observe(name="stage_analyze", capture_output=True)
        langfuse_observe.assert_called_once_with(
            name="stage_analyze", capture_input=False, capture_output=True
        )

    def test_enabled_without_langfuse(self, tracing_on: MagicMock) -> None:
        """A missing langfuse install falls back to the identity decorator."""
        with patch("builtins.__import__", side_effect=_import_without_langfuse):

            @observe(name="stage_metrics")
            def double(x: int) -> int:
                return 2 * x

        assert double(4) == 8

    def test_stage_nodes_keep_names(self) -> None:
        """Pipeline nodes stay plain functions named after their stage."""
        for stage, node in NODES.items():
            assert node.__name__ == stage.value
        assert Stage.GIANTS in NODES


class TestInitTracing:
    """Tests for init_tracing()."""

    def test_disabled_is_noop(self) -> None:
        with (
            patch("app.core.tracing.settings") as mock_settings,
            patch("langfuse.Langfuse") as langfuse_cls,
        ):
            mock_settings.observability.enabled = False
            init_tracing()
        langfuse_cls.assert_not_called()

    def test_creates_client(self, tracing_on: MagicMock) -> None:
        with patch("langfuse.Langfuse") as langfuse_cls:
            init_tracing()
        langfuse_cls.assert_called_once_with(
            public_key="pk-test",
            secret_key="sk-test",
            base_url="https://cloud.langfuse.com",
        )

    def test_missing_keys_warn(self, tracing_on: MagicMock) -> None:
        tracing_on.observability.langfuse_secret_key = ""
        with (
            patch("app.core.tracing.logger") as mock_logger,
            patch("langfuse.Langfuse") as langfuse_cls,
        ):
            init_tracing()
        langfuse_cls.assert_not_called()
        mock_logger.warning.assert_called_once()
        assert "missing" in mock_logger.warning.call_args[0][0].lower()

    def test_without_langfuse(self, tracing_on: MagicMock) -> None:
        with (
            patch("builtins.__import__", side_effect=_import_without_langfuse),
            patch("app.core.tracing.logger") as mock_logger,
        ):
            init_tracing()
        mock_logger.warning.assert_called_once()


class TestFlushTracing:
    """Tests for flush_tracing()."""

    def test_disabled_is_noop(self) -> None:
        with (
            patch("app.core.tracing.settings") as mock_settings,
            patch("langfuse.get_client") as get_client,
        ):
            mock_settings.observability.enabled = False
            flush_tracing()
        get_client.assert_not_called()

    def test_flushes_client(self, tracing_on: MagicMock) -> None:
        with patch("langfuse.get_client") as get_client:
            flush_tracing()
        get_client.return_value.flush.assert_called_once_with()

    def test_flush_errors_are_logged(self, tracing_on: MagicMock) -> None:
        with (
            patch("langfuse.get_client", side_effect=RuntimeError("offline")),
            patch("app.core.tracing.logger") as mock_logger,
        ):
            flush_tracing()
        mock_logger.exception.assert_called_once()


class TestExportLangfuseEnv:
    """Tests for the OBSERVABILITY__* -> LANGFUSE_* bridge."""

    def test_sets_missing_vars(self) -> None:
        with patch.dict(os.environ, {"LANGFUSE_HOST": "https://self-hosted.example"}):
            for var in ("LANGFUSE_PUBLIC_KEY", "LANGFUSE_SECRET_KEY"):
                os.environ.pop(var, None)
            _export_langfuse_env(
                ObservabilitySettings(enabled=True, langfuse_public_key="pk-1", langfuse_secret_key="")
            )
            assert os.environ["LANGFUSE_PUBLIC_KEY"] == "pk-1"
            assert "LANGFUSE_SECRET_KEY" not in os.environ
            assert os.environ["LANGFUSE_HOST"] == "https://self-hosted.example"
