"""Acceptance runners: oracle agreement and planted-signal recovery."""
