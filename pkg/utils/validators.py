import numpy as np

from errors import RejectedInputError


def as_point(x, dimension=None, name="x"):
    """
    Coerce input to a finite float vector

    Args:
        x: Array-like point
        dimension: Expected dimension, if known
        name: Name used in error messages

    Returns:
        np.ndarray: 1-D float array
    """
    try:
        arr = np.array(x, dtype=float)
    except (TypeError, ValueError):
        raise RejectedInputError(f"{name} is not numeric")

    if arr.ndim != 1 or arr.size == 0:
        raise RejectedInputError(f"{name} must be a non-empty vector")

    if not np.all(np.isfinite(arr)):
        raise RejectedInputError(f"{name} has non-finite entries")

    if dimension is not None and arr.size != dimension:
        raise RejectedInputError(
            f"Dimension mismatch for {name}: expected {dimension}, got {arr.size}"
        )

    return arr


def require_member(domain, x, tol, name="x"):
    if not domain.membership(x, tol):
        raise RejectedInputError(
            f"{name} is outside the {domain.kind} domain",
            {"point": np.asarray(x).tolist(), "tolerance": tol},
        )
    return x


def require_count(value, minimum, name):
    if int(value) != value or value < minimum:
        raise RejectedInputError(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)
