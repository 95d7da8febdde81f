"""Small shared helpers: exact rational coercion and input checks."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def as_fraction(value) -> Fraction:
    """Coerce a number to an exact Fraction.

    Ints and Fractions pass through.  Floats convert to their exact binary
    value (no decimal reinterpretation).  Strings accept both '1/3' and
    decimal notation, which is how the CLI keeps '0.1' meaning exactly 1/10.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value: {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def check_unit_point(x) -> tuple[float, ...]:
    """Validate a point of [0,1]^d given as a scalar or a sequence."""
    if isinstance(x, (int, float)):
        x = (x,)
    point = tuple(float(v) for v in x)
    if not point:
        raise ValueError("empty point")
    for v in point:
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"coordinate {v!r} outside [0, 1]")
    return point


def check_unit_array(X, d: int | None = None):
    """Validate an (n, d) array of points in [0,1]^d, returning float64."""
    import numpy as np

    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d array of points, got shape {X.shape}")
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {X.shape[1]}")
    if X.size and (X.min() < 0.0 or X.max() > 1.0):
        raise ValueError("points must lie in the unit cube [0, 1]^d")
    return X
