"""
Logging utilities for the engine, the simulator and the CLI.
"""
import logging
import os
import sys
from typing import Optional, Union

DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def resolve_level(level: Optional[Union[int, str]] = None) -> int:
    """
    Resolve a logging level from an explicit value or GUT_LOG_LEVEL.

    Args:
        level: Level as int or name; None falls back to the environment

    Returns:
        Numeric logging level
    """
    if level is None:
        level = os.getenv('GUT_LOG_LEVEL', 'INFO')
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        return resolved if isinstance(resolved, int) else logging.INFO
    return level


def setup_logger(
    name: str,
    level: Optional[Union[int, str]] = None,
    format_string: Optional[str] = None
) -> logging.Logger:
    """
    Set up a logger with consistent formatting.

    Records go to stderr so that CLI output on stdout stays parseable.

    Args:
        name: Logger name
        level: Logging level (int or name); defaults to GUT_LOG_LEVEL or INFO
        format_string: Custom format string (optional)

    Returns:
        Configured logger
    """
    if format_string is None:
        format_string = DEFAULT_FORMAT

    numeric_level = resolve_level(level)
    logger = logging.getLogger(name)
    logger.setLevel(numeric_level)
    logger.propagate = False

    # Remove existing handlers
    logger.handlers.clear()

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(numeric_level)
    handler.setFormatter(logging.Formatter(format_string))
    logger.addHandler(handler)

    return logger


def get_logger(name: str) -> logging.Logger:
    """
    Get or create a logger.

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        return setup_logger(name)
    return logger


def set_package_level(level: Union[int, str]) -> None:
    """
    Apply a level to every logger already created under the core package.

    Args:
        level: Logging level (int or name)
    """
    numeric_level = resolve_level(level)
    for name, candidate in logging.Logger.manager.loggerDict.items():
        if isinstance(candidate, logging.Logger) and name.startswith(('core', 'scripts')):
            candidate.setLevel(numeric_level)
            for handler in candidate.handlers:
                handler.setLevel(numeric_level)
