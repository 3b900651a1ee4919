"""Stderr logging for the library and the ``i2c`` command."""

import logging
import sys

LOGGER_NAME = "input_inference"
LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"

_HANDLER_NAME = "i2c-stderr"

# logging.getLevelNamesMapping() is Python >= 3.11; it returns a copy of _nameToLevel.
_level_names_mapping = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))


def _parse_level(level: str | int) -> int:
    if isinstance(level, int):
        return level
    return _level_names_mapping().get(level.upper(), logging.INFO)


def setup_logger(name: str = LOGGER_NAME, level: str | int = "INFO") -> logging.Logger:
    """Attach one stderr handler to ``name``; repeated calls only change the level.

    Artifacts and status files are the command's output, so records never go to stdout.
    """
    logger = logging.getLogger(name)
    logger.setLevel(_parse_level(level))
    if not any(handler.get_name() == _HANDLER_NAME for handler in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    return logger
