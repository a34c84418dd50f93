"""Benchmark experiments, their CSV/SVG output and run manifests."""
