"""Per-paper metrics: citation counts, giant index, disruption and normalization."""
