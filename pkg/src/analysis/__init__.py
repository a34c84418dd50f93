"""Restricted isometry constants and the convergence constants derived from them."""
