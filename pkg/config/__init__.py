"""Default settings and experiment-file loading."""
