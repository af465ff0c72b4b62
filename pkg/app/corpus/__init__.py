"""Citation corpus: input schema, ingestion and the read-only index."""
