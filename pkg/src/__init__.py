"""cappa-bench: fixed-time proximal flows for l1-regularized sparse recovery."""

from config.settings import VERSION as __version__

__all__ = ["__version__"]
