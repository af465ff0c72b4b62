"""Shared configuration, errors, table I/O and tracing."""

from app.core.config import settings

__all__ = ["settings"]
