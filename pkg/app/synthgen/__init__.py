"""Synthetic corpora with planted signals and the brute-force oracle."""
