"""Staged pipeline: ingest, snapshots, giants, metrics and analyses with cached artifacts."""
