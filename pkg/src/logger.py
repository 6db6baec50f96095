"""Logging configuration for cnn_dhm."""

import logging
import sys

from src.config import LOG_LEVEL


def setup_logger(name: str = "cnn_dhm", level: str = LOG_LEVEL) -> logging.Logger:
    """Set up and return a configured logger.

    Records go to stderr so that machine-readable output on stdout
    (``--json``, ``--dry-run`` manifests) is never interleaved with logs.

    Args:
        name: Logger name (default: cnn_dhm)
        level: Logging level (default: CNN_DHM_LOG_LEVEL or INFO)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    # Avoid adding duplicate handlers
    if logger.handlers:
        return logger

    logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        logging.Formatter("%(asctime)s - %(levelname)s - %(message)s")
    )
    logger.addHandler(handler)

    return logger
