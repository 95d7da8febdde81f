"""Shared high-precision oracles, independent of the package's arithmetic."""

from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest


def mp_frac_pow2(q: int, i: int, degree: int) -> mp.mpf:
    """frac(q * 2^(i/degree)) via mpmath at 100 decimal digits."""
    with mp.workdps(100):
        value = q * mp.power(2, mp.mpf(i) / degree)
        return value - mp.floor(value)


def mp_frac_pow2_fraction(q: int, i: int, degree: int, bits: int = 120) -> Fraction:
    """The same oracle value truncated to an exact dyadic rational."""
    with mp.workdps(100):
        value = q * mp.power(2, mp.mpf(i) / degree)
        frac = value - mp.floor(value)
        return Fraction(int(mp.floor(frac * 2**bits)), 2**bits)


def mp_pow2(i: int, degree: int) -> mp.mpf:
    with mp.workdps(100):
        return mp.power(2, mp.mpf(i) / degree)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
