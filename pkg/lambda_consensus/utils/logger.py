"""
Logger Module: Logging utilities for the consensus simulator
"""

import logging
import sys
from typing import Optional, Union

ROOT_LOGGER_NAME = "lambda_consensus"


class Logger:
    """
    Custom logger for the consensus simulator.

    Every instance logs through a child of the package root logger, which
    owns the single stderr handler. Standard output is left to the CLI's
    machine-readable documents.
    """

    def __init__(self, name: str = ROOT_LOGGER_NAME, level: Optional[int] = None):
        if name != ROOT_LOGGER_NAME and not name.startswith(ROOT_LOGGER_NAME + "."):
            name = f"{ROOT_LOGGER_NAME}.{name}"
        self.name = name
        self.logger = logging.getLogger(name)
        if level is not None:
            self.logger.setLevel(level)

        # Prevent adding handlers multiple times
        root = logging.getLogger(ROOT_LOGGER_NAME)
        if not root.handlers:
            self._setup_handlers(root)

    def _setup_handlers(self, root: logging.Logger):
        """Set up the stderr handler on the package root logger."""
        console_handler = logging.StreamHandler(sys.stderr)

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        console_handler.setFormatter(formatter)

        root.addHandler(console_handler)
        root.setLevel(logging.WARNING)
        root.propagate = False

    def debug(self, message: str):
        """Log a debug message."""
        self.logger.debug(message)

    def info(self, message: str):
        """Log an info message."""
        self.logger.info(message)

    def warning(self, message: str):
        """Log a warning message."""
        self.logger.warning(message)

    def error(self, message: str):
        """Log an error message."""
        self.logger.error(message)

    def log_performance(self, operation: str, duration: float, details: Optional[dict] = None):
        """Log performance metrics for an operation."""
        perf_message = f"PERFORMANCE: {operation} took {duration:.4f}s"
        if details:
            perf_message += f" | Details: {details}"
        self.logger.info(perf_message)


def set_level(level: Union[int, str]):
    """
    Set the verbosity of every package logger.

    Args:
        level: A logging level number or name ('DEBUG', 'INFO', ...)
    """
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ValueError(f"Unknown log level {level!r}")
        level = resolved
    Logger()  # make sure the handler exists
    logging.getLogger(ROOT_LOGGER_NAME).setLevel(level)
