"""Shared helpers: logging, exceptions, validation and the worker pool."""
