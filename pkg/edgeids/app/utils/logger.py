import logging
import sys

from edgeids.app.core.config import get_settings


def setup_logger(name: str) -> logging.Logger:
    """
    Configure and return a standard logger for the application.
    Records go to stderr: stdout is reserved for the alert stream of `detect`.
    """
    logger = logging.getLogger(name)

    # Avoid adding multiple handlers if the logger is already configured
    if not logger.handlers:
        level = logging.getLevelName(get_settings().LOG_LEVEL.upper())
        if not isinstance(level, int):
            level = logging.INFO
        logger.setLevel(level)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.DEBUG)

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        console_handler.setFormatter(formatter)

        logger.addHandler(console_handler)
        logger.propagate = False

    return logger


def set_level(level: str) -> None:
    """Change the package log level at runtime (`--log-level`)."""
    resolved = logging.getLevelName(level.upper())
    if isinstance(resolved, int):
        logger.setLevel(resolved)


# Create a default logger instance
logger = setup_logger("edgeids")
