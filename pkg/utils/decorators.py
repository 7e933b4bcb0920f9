"""
Decorators shared by the numerical services
"""

from functools import wraps
import logging
import time

import numpy as np

from errors import NumericalFailure

logger = logging.getLogger(__name__)


def numerical_guard(operation):
    """
    Run the wrapped function with numpy floating-point errors raised, and
    turn them into NumericalFailure tagged with the operation name.

    Usage:
        @numerical_guard("bregman_project")
        def bregman_project(...):
            ...
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                with np.errstate(over="raise", invalid="raise", divide="raise"):
                    return func(*args, **kwargs)
            except FloatingPointError as e:
                raise NumericalFailure(
                    f"Floating-point failure in {operation}: {e}",
                    {"operation": operation},
                ) from e
        return wrapper
    return decorator


def logged(func):
    """Log start and wall-clock duration of a long-running experiment"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        logger.info(f"Starting {func.__qualname__}")
        started = time.perf_counter()
        result = func(*args, **kwargs)
        logger.info(f"Finished {func.__qualname__} in {time.perf_counter() - started:.2f}s")
        return result
    return wrapper
