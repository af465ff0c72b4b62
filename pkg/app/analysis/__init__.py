"""Aggregate analyses exported as plot-ready tables with provenance sidecars."""
