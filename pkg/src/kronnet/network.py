"""The fixed-architecture network: activation, cell indexing, forward passes.

The network on [0,1]^d is piecewise constant: a point is mapped to one of
N = (M+1)^d grid cells, the cell index i is shifted into the N-th
triangular block of the activation (where the activation value is
2^(i/(N+1))), multiplied by the single integer weight q, reduced mod 1,
and affinely rescaled to [-K, K).  Everything irrational is evaluated
through the certified fixed-point layer so outputs carry a rigorous
error bound instead of accumulated float roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._util import check_unit_array, check_unit_point
from .fixedpoint import (
    PRECISION_CAP,
    FixedPoint,
    PrecisionCapError,
    frac_mult_interval,
    pow2_root,
    required_bits,
)

#: Default output tolerance for automatic precision escalation, as a power
#: of two: the returned value is within 2**-OUTPUT_TOL_BITS * 2K of exact.
OUTPUT_TOL_BITS = 40


@dataclass(frozen=True)
class NetworkParams:
    """One network: input dimension d, output bound K, grid resolution M,
    and the single integer weight q."""

    d: int
    K: float
    M: int
    q: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if not self.K > 0:
            raise ValueError("K must be positive")
        if self.q != int(self.q):
            raise ValueError("q must be an integer")

    @property
    def n_cells(self) -> int:
        return (self.M + 1) ** self.d

    @property
    def block_shift(self) -> int:
        """Shift placing cell indices into the N-th triangular block of the
        activation, so activation(block_shift + i) = 2^(i/(N+1))."""
        n = self.n_cells
        return (n - 1) * n // 2


def triangular_block(x: int) -> tuple[int, int]:
    """Locate x >= 1 in the triangular blocks ((m-1)m/2, m(m+1)/2].

    Returns (m, offset) with offset = x - (m-1)m/2 in [1, m].  Closed form
    by integer square root plus a local correction, exact for big ints.
    """
    if x < 1:
        raise ValueError("x must be >= 1")
    m = (math.isqrt(8 * x - 7) + 1) // 2
    while m * (m + 1) // 2 < x:
        m += 1
    while (m - 1) * m // 2 >= x:
        m -= 1
    return m, x - (m - 1) * m // 2


def activation(x, frac_bits: int) -> FixedPoint:
    """The staircase-of-roots activation.

    On natural x in block m (offset j) the value is 2^(j/(m+1)), returned
    as a certified floor approximation with frac_bits fractional bits.
    On everything else the value is exactly 0 (the choice off the naturals
    is immaterial to the network, which only feeds it integers).
    """
    if isinstance(x, float):
        if not (x.is_integer() and x >= 1):
            return FixedPoint(0, frac_bits)
        x = int(x)
    if x < 1:
        return FixedPoint(0, frac_bits)
    m, offset = triangular_block(x)
    # offset <= m < m + 1, so this never degenerates to an exact power of 2.
    return pow2_root(offset, m + 1, frac_bits)


def activation_exponent(x: int) -> Fraction:
    """Exact exponent e with activation(x) = 2**e, for natural x."""
    m, offset = triangular_block(x)
    return Fraction(offset, m + 1)


def grid_index(x, M: int) -> int:
    """Cell index 1 + sum_k (M+1)^(k-1) * floor(M * x_k), in [1, (M+1)^d].

    Constant on each half-open grid cell; the upper face x_k = 1 maps to
    digit M.  Coordinates outside [0, 1] are rejected.
    """
    point = check_unit_point(x)
    index = 1
    stride = 1
    for v in point:
        digit = min(int(math.floor(M * v)), M)
        index += stride * digit
        stride *= M + 1
    return index


def grid_index_batch(X, M: int) -> np.ndarray:
    """Vectorized grid_index over an (n, d) array; returns int64 indices."""
    X = check_unit_array(X)
    digits = np.minimum(np.floor(M * X), M).astype(np.int64)
    strides = (M + 1) ** np.arange(X.shape[1], dtype=np.int64)
    return 1 + digits @ strides


@dataclass(frozen=True)
class Cell:
    """An axis-aligned grid cell, half-open except for degenerate axes.

    Per axis the cell is [lower, upper) when lower < upper and the single
    point {lower} when lower == upper (the digit-M face at coordinate 1).
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(lo if lo == hi else (lo + hi) / 2.0 for lo, hi in zip(self.lower, self.upper))

    @property
    def volume(self) -> float:
        vol = 1.0
        for lo, hi in zip(self.lower, self.upper):
            vol *= hi - lo
        return vol

    def contains(self, x) -> bool:
        point = check_unit_point(x)
        if len(point) != len(self.lower):
            return False
        for v, lo, hi in zip(point, self.lower, self.upper):
            if lo == hi:
                if v != lo:
                    return False
            elif not (lo <= v < hi):
                return False
        return True


def cell_of_index(i: int, M: int, d: int) -> Cell:
    """The unique cell on which grid_index equals i (its inverse).

    Decomposes i-1 in base M+1; digit m < M gives the axis interval
    [m/M, (m+1)/M), digit M gives the degenerate face {1}.
    """
    n_cells = (M + 1) ** d
    if not (1 <= i <= n_cells):
        raise ValueError(f"index {i} out of range [1, {n_cells}]")
    rem = i - 1
    lower = []
    upper = []
    for _ in range(d):
        m = rem % (M + 1)
        rem //= M + 1
        if m == M:
            lower.append(1.0)
            upper.append(1.0)
        else:
            lower.append(m / M)
            upper.append((m + 1) / M)
    return Cell(lower=tuple(lower), upper=tuple(upper))


def _frac_center(
    q: int,
    i: int,
    n_cells: int,
    tol_bits: int = OUTPUT_TOL_BITS,
    start_bits: int | None = None,
    precision_cap: int = PRECISION_CAP,
) -> tuple[Fraction, int]:
    """Certified frac(q * 2^(i/(N+1))) as an exact dyadic rational.

    Escalates precision until the enclosing torus interval (a) has radius
    <= 2**-tol_bits and (b) does not wrap the 0/1 seam, so the center is
    within the radius of the exact fractional part as a plain real number.
    For q != 0 the exact product is irrational, hence never an integer,
    so (b) always terminates.
    """
    shift = (n_cells - 1) * n_cells // 2
    tol = Fraction(1, 1 << tol_bits)
    bits = start_bits if start_bits is not None else max(required_bits(max(abs(q), 1), tol), 8)
    while True:
        alpha = activation(shift + i, bits)
        interval = frac_mult_interval(q, alpha)
        if interval.radius <= tol and not interval.wraps:
            return interval.center, bits
        bits *= 2
        if bits > precision_cap:
            raise PrecisionCapError(
                f"could not certify frac({q} * 2^({i}/{n_cells + 1})) within {precision_cap} bits"
            )


def _affine_output(K: float, center: Fraction) -> float:
    return 2.0 * K * float(center) - K


def cell_value(params: NetworkParams, i: int, tol_bits: int = OUTPUT_TOL_BITS) -> float:
    """Network output on cell i: 2K * frac(q * 2^(i/(N+1))) - K."""
    center, _ = _frac_center(params.q, i, params.n_cells, tol_bits)
    return _affine_output(params.K, center)


def value_table(params: NetworkParams, tol_bits: int = OUTPUT_TOL_BITS) -> np.ndarray:
    """All N cell outputs as a float64 array (index i-1 holds cell i)."""
    return np.array(
        [cell_value(params, i, tol_bits) for i in range(1, params.n_cells + 1)],
        dtype=np.float64,
    )


def forward(params: NetworkParams, x, tol_bits: int = OUTPUT_TOL_BITS) -> float:
    """Evaluate the network at a point of [0,1]^d via its analytic form.

    Output lies in [-K, K); certified within 2**-tol_bits * 2K of exact.
    """
    point = check_unit_point(x)
    if len(point) != params.d:
        raise ValueError(f"expected a point of dimension {params.d}")
    return cell_value(params, grid_index(point, params.M), tol_bits)


def forward_batch(params: NetworkParams, xs, tol_bits: int = OUTPUT_TOL_BITS) -> list[float]:
    """Elementwise forward over a sequence of points.

    The network is piecewise constant, so the N cell outputs are computed
    once and dispatched by cell index; pointwise equal to forward().
    """
    xs = list(xs)
    if not xs:
        return []
    X = check_unit_array(np.asarray(xs, dtype=np.float64), params.d)
    table = value_table(params, tol_bits)
    idx = grid_index_batch(X, params.M) - 1
    return [float(v) for v in table[idx]]


def forward_layerwise(params: NetworkParams, x, tol_bits: int = OUTPUT_TOL_BITS) -> float:
    """Evaluate the network layer by layer, as a structural cross-check.

    Composition: scale by M, floor coordinatewise, inner product with
    (1, M+1, ..., (M+1)^(d-1)), floor shifted by 1, duplicate, apply
    (floor; shifted activation), scale the second lane by q, apply
    (shifted activation; floor), combine with the row (2Kq, -2K) and the
    output bias -K.  The floor of q * activation(...) is certified by
    escalating precision until the error band excludes every integer.
    """
    point = check_unit_point(x)
    if len(point) != params.d:
        raise ValueError(f"expected a point of dimension {params.d}")
    M, K, q = params.M, params.K, params.q

    scaled = [M * v for v in point]
    floored = [min(int(math.floor(u)), M) for u in scaled]
    s = sum(f * (M + 1) ** k for k, f in enumerate(floored))
    g = math.floor(s + 1)  # shifted floor; s is already an integer

    shift = params.block_shift
    if q == 0:
        # Second lane is 0 * activation = 0; floor 0; output -K exactly.
        return _affine_output(K, Fraction(0))

    tol = Fraction(1, 1 << tol_bits)
    bits = max(required_bits(abs(q), tol), 8)
    while True:
        alpha = activation(shift + g, bits)
        den = 1 << bits
        approx = q * alpha.mantissa  # numerator of q * alpha over den
        if q > 0:
            band_lo, band_hi = approx, approx + q
        else:
            band_lo, band_hi = approx + q, approx
        # The floor lane is certified once the whole error band shares one
        # floor (q * 2^(g/(N+1)) is irrational, so this terminates).
        if band_lo // den == band_hi // den:
            floor_val = band_lo // den
            # Row (2Kq, -2K) against (activation; floor), then the -K bias:
            # 2K*q*alpha - 2K*floor - K == 2K*(q*alpha - floor) - K.
            frac_part = Fraction(approx - floor_val * den, den)
            return _affine_output(K, frac_part)
        bits *= 2
        if bits > PRECISION_CAP:
            raise PrecisionCapError(
                f"could not certify floor(q * activation) within {PRECISION_CAP} bits"
            )
