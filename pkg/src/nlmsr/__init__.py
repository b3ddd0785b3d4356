"""High-order nonlocal-means image restoration."""
