"""Grid-graph image embeddings built from key-point patches."""
