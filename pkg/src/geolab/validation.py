"""Input validation helpers used by the public entry points."""

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput


def as_matrix(x, name="matrix"):
    """Coerce ``x`` to a finite 2-d float64 array."""
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name}: expected a 2-d array, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput(f"{name}: contains non-finite entries")
    return a


def as_square_matrix(x, name="matrix"):
    a = as_matrix(x, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name}: expected square, got shape {a.shape}")
    return a


def as_matrix_stack(x, name="stack"):
    """Coerce ``x`` to a finite (n, m, m) float64 array of square matrices."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionMismatch(
            f"{name}: expected shape (n, m, m), got {a.shape}"
        )
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput(f"{name}: contains non-finite entries")
    return a


def check_same_shape(a, b, name_a="a", name_b="b"):
    if a.shape != b.shape:
        raise DimensionMismatch(
            f"{name_a} has shape {a.shape} but {name_b} has shape {b.shape}"
        )


def as_probability_vector(x, n=None, name="distribution"):
    v = np.asarray(x, dtype=float).ravel()
    if n is not None and v.size != n:
        raise DimensionMismatch(f"{name}: expected length {n}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput(f"{name}: contains non-finite entries")
    return v
