"""Langfuse tracing for pipeline stages.

Provides:
- ``observe()``: traces a stage or batch driver when observability is
  enabled; returns the function unchanged otherwise.
- ``init_tracing()``: creates the Langfuse client at CLI startup.
- ``flush_tracing()``: sends buffered spans before the CLI exits.

Stage functions take and return the whole pipeline state (corpus index,
snapshots, metric rows), so inputs and outputs are not captured unless a
caller asks for it.
"""

import logging
import os
from collections.abc import Callable
from typing import Any

from app.core.config import ObservabilitySettings, settings

logger = logging.getLogger(__name__)


def _export_langfuse_env(obs: ObservabilitySettings) -> None:
    """Mirror OBSERVABILITY__* keys into the LANGFUSE_* variables the SDK reads on import."""
    for var, value in (
        ("LANGFUSE_PUBLIC_KEY", obs.langfuse_public_key),
        ("LANGFUSE_SECRET_KEY", obs.langfuse_secret_key),
        ("LANGFUSE_HOST", obs.langfuse_base_url),
    ):
        if value:
            os.environ.setdefault(var, value)


if settings.observability.enabled:
    _export_langfuse_env(settings.observability)


def observe(**kwargs: Any) -> Callable[..., Any]:
    """Decorator that traces a function via Langfuse when enabled.

    Args:
        **kwargs: Passed to ``langfuse.observe()``. ``capture_input`` and
            ``capture_output`` default to False.

    Example::

        @observe(name="stage_giants")
        def giants(state):
            ...
    """
    if settings.observability.enabled:
        try:
            from langfuse import observe as langfuse_observe

            options = {"capture_input": False, "capture_output": False, **kwargs}
            return langfuse_observe(**options)  # type: ignore[no-any-return]
        except ImportError:
            logger.warning("langfuse not installed; @observe() is a no-op")

    def noop_decorator(fn: Callable) -> Callable:
        return fn

    return noop_decorator


def init_tracing() -> None:
    """Create the Langfuse client when observability is enabled and keys are set."""
    if not settings.observability.enabled:
        logger.debug("Observability disabled; skipping Langfuse init")
        return

    obs = settings.observability
    if not obs.langfuse_public_key or not obs.langfuse_secret_key:
        logger.warning(
            "Observability enabled but Langfuse keys are missing. Tracing will not be active."
        )
        return

    try:
        from langfuse import Langfuse

        Langfuse(
            public_key=obs.langfuse_public_key,
            secret_key=obs.langfuse_secret_key,
            base_url=obs.langfuse_base_url,
        )
        logger.info(f"Langfuse tracing initialized (base_url={obs.langfuse_base_url})")
    except ImportError:
        logger.warning("langfuse package not installed; tracing not available")
    except Exception:
        logger.exception("Failed to initialize Langfuse tracing")


def flush_tracing() -> None:
    """Send buffered spans; the CLI exits right after a run."""
    if not settings.observability.enabled:
        return
    try:
        from langfuse import get_client

        get_client().flush()
    except ImportError:
        return
    except Exception:
        logger.exception("Failed to flush Langfuse traces")
