"""Input validation helpers shared by the clustering-facing estimators."""
from __future__ import annotations

import numpy as np

from .errors import DataError


def check_distance_matrix(d) -> np.ndarray:
    """Validate an n x n distance matrix: finite, nonnegative, symmetric,
    zero diagonal.  Returns a float64 copy."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DataError(f"distance matrix must be square, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise DataError("distance matrix contains non-finite entries")
    if np.any(d < 0):
        raise DataError("distance matrix contains negative entries")
    if np.any(np.diag(d) != 0):
        raise DataError("distance matrix diagonal must be zero")
    if not np.array_equal(d, d.T):
        raise DataError("distance matrix must be symmetric")
    return d.copy()


def check_same_length(a, b, what: str) -> None:
    if len(a) != len(b):
        raise DataError(f"{what} length mismatch: {len(a)} vs {len(b)}")
