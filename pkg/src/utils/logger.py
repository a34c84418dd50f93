#!/usr/bin/env python3
"""
Logger Utility Module
Provides centralized logging configuration for cappa-bench

The command line calls setup_logger() once; it installs a colored console
handler and rotating file handlers on the root logger. Library modules only
call get_logger(__name__), which never touches handlers, so importing the
solvers has no filesystem side effects.
"""

import logging
import logging.handlers
import sys
from pathlib import Path

from config.settings import LOGGING_SETTINGS


class ColoredFormatter(logging.Formatter):
    """Custom formatter that adds colors to console output."""

    COLORS = {
        'DEBUG': '\033[36m',    # Cyan
        'INFO': '\033[32m',     # Green
        'WARNING': '\033[33m',  # Yellow
        'ERROR': '\033[31m',    # Red
        'CRITICAL': '\033[35m', # Magenta
        'RESET': '\033[0m'
    }

    def format(self, record):
        """Format log record with colors for console output."""
        levelname = record.levelname
        if levelname in self.COLORS:
            record.levelname = f"{self.COLORS[levelname]}{levelname}{self.COLORS['RESET']}"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname


class LoggerManager:
    """Manages logging configuration for the command line application."""

    def __init__(self, log_directory=None, log_to_file=True):
        """Initialize the logger manager."""
        self.log_directory = Path(log_directory or LOGGING_SETTINGS['log_dir'])
        self.log_to_file = log_to_file
        self.log_filename = self.log_directory / LOGGING_SETTINGS['log_filename']
        self.error_log_filename = self.log_directory / LOGGING_SETTINGS['error_log_filename']

        self._setup_root_logger()

    def _setup_root_logger(self):
        """Setup the root logger with handlers for file and console output."""
        root_logger = logging.getLogger()
        root_logger.setLevel(logging.DEBUG)
        root_logger.handlers.clear()

        file_formatter = logging.Formatter(
            LOGGING_SETTINGS['file_format'],
            datefmt=LOGGING_SETTINGS['date_format']
        )
        console_formatter = ColoredFormatter(
            LOGGING_SETTINGS['log_format'],
            datefmt='%H:%M:%S'
        )

        if self.log_to_file:
            try:
                self.log_directory.mkdir(parents=True, exist_ok=True)
                file_handler = logging.handlers.RotatingFileHandler(
                    self.log_filename,
                    maxBytes=LOGGING_SETTINGS['max_log_size'],
                    backupCount=LOGGING_SETTINGS['backup_count'],
                    encoding='utf-8'
                )
                file_handler.setLevel(LOGGING_SETTINGS['file_level'])
                file_handler.setFormatter(file_formatter)
                root_logger.addHandler(file_handler)

                error_handler = logging.handlers.RotatingFileHandler(
                    self.error_log_filename,
                    maxBytes=LOGGING_SETTINGS['max_log_size'] // 2,
                    backupCount=3,
                    encoding='utf-8'
                )
                error_handler.setLevel(logging.ERROR)
                error_handler.setFormatter(file_formatter)
                root_logger.addHandler(error_handler)
            except OSError as e:
                print(f"Warning: Could not create file handlers: {e}", file=sys.stderr)

        # Console goes to stderr; stdout carries reports
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(LOGGING_SETTINGS['console_level'])
        console_handler.setFormatter(console_formatter)
        root_logger.addHandler(console_handler)

    def set_log_level(self, level):
        """Set the console log level."""
        if isinstance(level, str):
            level = getattr(logging, level.upper())

        for handler in logging.getLogger().handlers:
            if type(handler) is logging.StreamHandler:
                handler.setLevel(level)


# Global logger manager instance
_logger_manager = None


def setup_logger(name=None, log_level=logging.INFO, log_directory=None, log_to_file=True):
    """
    Configure application logging and return a logger.

    Args:
        name (str, optional): Logger name. Defaults to the application name.
        log_level (int, optional): Console logging level. Defaults to INFO.
        log_directory (str, optional): Directory for rotating log files.
        log_to_file (bool): Whether to install file handlers.

    Returns:
        logging.Logger: Configured logger instance.
    """
    global _logger_manager

    _logger_manager = LoggerManager(log_directory, log_to_file)
    _logger_manager.set_log_level(log_level)

    logger = logging.getLogger(name or 'cappa_bench')
    logger.debug(f"Logging initialized (files: {log_to_file})")
    return logger


def get_logger(name=None):
    """Return a named logger without configuring handlers."""
    return logging.getLogger(name or 'cappa_bench')


def set_debug_mode(enabled=True):
    """
    Enable or disable debug output on the console.

    Args:
        enabled (bool): Whether to enable debug mode.
    """
    if _logger_manager is None:
        return
    _logger_manager.set_log_level(logging.DEBUG if enabled else logging.INFO)
