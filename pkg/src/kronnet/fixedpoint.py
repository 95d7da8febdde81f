"""Certified dyadic fixed-point arithmetic for fractional parts of q * 2^(i/D).

Everything here is exact integer / rational arithmetic.  A FixedPoint is a
big-integer mantissa over an implicit power-of-two denominator, rounded
toward zero (floor semantics) so the sign of the representation error is
always known.  TorusInterval then carries that one-sided error through
multiplication by an integer and reduction mod 1, so callers can make
rigorous accept / reject decisions about quantities of the form
frac(q * 2^(i/D)) without trusting platform floating point.

Precision is a parameter: operations that cannot certify their answer at
the current number of fractional bits raise InsufficientPrecisionError and
the caller escalates (conventionally by doubling, capped at 4096 bits,
beyond which PrecisionCapError is raised).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ._util import as_fraction, ceil_div

HALF = Fraction(1, 2)

#: Hard ceiling for precision escalation, in fractional bits.
PRECISION_CAP = 4096


class PrecisionError(ArithmeticError):
    """Base class for certified-precision failures."""


class InsufficientPrecisionError(PrecisionError):
    """The requested certificate cannot be produced at the current bits.

    Retryable: recompute with more fractional bits.
    """


class PrecisionCapError(PrecisionError):
    """Escalation passed the configured precision cap."""


def nth_root_floor(a: int, degree: int) -> int:
    """Exact integer floor of a**(1/degree).

    Args:
        a: nonnegative big integer.
        degree: root degree, >= 1.

    Returns:
        r with r**degree <= a < (r+1)**degree.  Pure integer Newton
        iteration from an upper estimate; deterministic.
    """
    if a < 0:
        raise ValueError("negative radicand")
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if degree == 1 or a < 2:
        return a
    if degree == 2:
        return math.isqrt(a)
    if a.bit_length() <= degree:
        # 1 <= a < 2**degree, so the root is 1.
        return 1
    x = 1 << ceil_div(a.bit_length(), degree)  # x >= a**(1/degree)
    while True:
        y = ((degree - 1) * x + a // x ** (degree - 1)) // degree
        if y >= x:
            return x
        x = y


@lru_cache(maxsize=None)
def _root_mantissa(i: int, degree: int, frac_bits: int) -> int:
    return nth_root_floor(1 << (i + degree * frac_bits), degree)


@dataclass(frozen=True)
class FixedPoint:
    """A nonnegative dyadic rational mantissa / 2**frac_bits.

    Values produced by :func:`pow2_root` approximate their target from
    below: target - 2**-frac_bits < value <= target.
    """

    mantissa: int
    frac_bits: int

    def __post_init__(self):
        if self.mantissa < 0:
            raise ValueError("mantissa must be nonnegative")
        if self.frac_bits < 0:
            raise ValueError("frac_bits must be nonnegative")

    @property
    def value(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.frac_bits)

    def __float__(self) -> float:
        return float(self.value)


def pow2_root(i: int, degree: int, frac_bits: int) -> FixedPoint:
    """Floor approximation of 2**(i/degree) with frac_bits fractional bits.

    Requires 1 <= i <= degree - 1 (integer powers of two do not need this
    machinery and are rejected so callers cannot silently lose exactness).
    The exact error e = 2**(i/degree) - value satisfies 0 <= e < 2**-frac_bits.
    """
    if degree < 2 or not (1 <= i <= degree - 1):
        raise ValueError(f"need 1 <= i <= degree-1, got i={i}, degree={degree}")
    if frac_bits < 0:
        raise ValueError("frac_bits must be nonnegative")
    return FixedPoint(_root_mantissa(i, degree, frac_bits), frac_bits)


def required_bits(q_max: int, target_radius) -> int:
    """Smallest B such that q_max * 2**-B <= target_radius.

    q_max >= 1; 0 < target_radius < 1/2.
    """
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    radius = as_fraction(target_radius)
    if not (0 < radius < HALF):
        raise ValueError("target_radius must lie in (0, 1/2)")
    # Smallest B with 2**B >= q_max / radius.
    threshold = ceil_div(q_max * radius.denominator, radius.numerator)
    bits = (threshold - 1).bit_length()
    # Exact adjustment; bit_length gets it right but this is cheap insurance.
    while (1 << bits) * radius.numerator < q_max * radius.denominator:
        bits += 1
    while bits > 0 and (1 << (bits - 1)) * radius.numerator >= q_max * radius.denominator:
        bits -= 1
    return bits


@dataclass(frozen=True)
class TorusInterval:
    """A set {(center + t) mod 1 : |t| <= radius} on the torus [0, 1).

    center and radius are exact rationals (dyadic whenever produced by
    frac_mult_interval, so comparisons reduce to integer comparisons);
    radius < 1/2 always, and wraps flags whether the set crosses the 0/1
    seam.  By construction the set contains the exact value it certifies.
    """

    center: Fraction
    radius: Fraction
    wraps: bool

    @classmethod
    def from_center_radius(cls, center: Fraction, radius: Fraction) -> "TorusInterval":
        if radius < 0:
            raise ValueError("negative radius")
        if radius >= HALF:
            raise InsufficientPrecisionError(
                f"torus interval radius {radius} >= 1/2; raise the precision"
            )
        center = center % 1
        wraps = center < radius or center + radius >= 1
        return cls(center=center, radius=radius, wraps=wraps)

    def pieces(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """The set as closed sub-intervals of [0, 1] (closure is conservative)."""
        lo = self.center - self.radius
        hi = self.center + self.radius
        if not self.wraps:
            return ((lo, hi),)
        if hi >= 1:
            return ((Fraction(0), hi - 1), (lo, Fraction(1)))
        # lo < 0
        return ((Fraction(0), hi), (lo + 1, Fraction(1)))

    def contains(self, x) -> bool:
        x = as_fraction(x)
        return any(lo <= x <= hi for lo, hi in self.pieces())

    def abs_diff_bounds(self, target) -> tuple[Fraction, Fraction]:
        """Certified bounds on |v - target| over all v in the set.

        Plain absolute difference, not wrap-around torus distance.
        """
        b = as_fraction(target)
        lower = None
        upper = None
        for lo, hi in self.pieces():
            piece_hi = max(abs(lo - b), abs(hi - b))
            piece_lo = Fraction(0) if lo <= b <= hi else min(abs(lo - b), abs(hi - b))
            lower = piece_lo if lower is None else min(lower, piece_lo)
            upper = piece_hi if upper is None else max(upper, piece_hi)
        return lower, upper


def frac_mult_interval(q: int, alpha: FixedPoint) -> TorusInterval:
    """Certified enclosure of frac(q * alpha_exact).

    alpha must come from :func:`pow2_root` (error in [0, 2**-B)), so the
    exact product lies within |q| * 2**-B of q * alpha.value and the torus
    interval centered at frac(q * mantissa / 2**B) with that radius
    contains frac(q * alpha_exact) whichever side of an integer the error
    band falls on.

    Raises InsufficientPrecisionError when |q| * 2**-B >= 1/2, signalling
    the caller to raise B.
    """
    den = 1 << alpha.frac_bits
    center = Fraction((q * alpha.mantissa) % den, den)
    radius = Fraction(abs(q), den)
    return TorusInterval.from_center_radius(center, radius)
