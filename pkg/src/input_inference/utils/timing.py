"""Wall-clock timing of the expensive entry points (EM runs, LQR solves, evaluations)."""

from __future__ import annotations

import functools
import logging
import time
from typing import Any, Callable

logger = logging.getLogger("input_inference")


def timed(fn: Callable[..., Any]) -> Callable[..., Any]:
    """Log the wall time of each call at DEBUG, including calls that raise."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(
                    "%s completed in %.3fs", fn.__qualname__, time.perf_counter() - start
                )

    return wrapper
