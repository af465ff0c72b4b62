"""Temporal co-citation network: snapshots, incremental advance and ranked neighbors."""
