"""Vectorized fixed-point residues for scanning integer multipliers.

Certified rational arithmetic is far too slow for scans over millions of
candidate multipliers, so scans first run over uint64 residues
(q * A) mod 2**SCAN_BITS computed blockwise (the big-integer part is
folded once per block, the per-candidate part stays below 2**63 so uint64
never wraps), and only shortlisted candidates go through the exact checks.
"""

from __future__ import annotations

import numpy as np

SCAN_BITS = 48
BLOCK = 1 << 15
_MASK = np.uint64((1 << SCAN_BITS) - 1)
_SCALE = 2.0 ** -SCAN_BITS


def scan_position(weight: int) -> int:
    """1-based position of a weight in the canonical order 0, +1, -1, +2, -2, ..."""
    if weight == 0:
        return 1
    return 2 * abs(weight) + (0 if weight > 0 else 1)


def iter_blocks(cap: int, block: int = BLOCK):
    """Contiguous |q| ranges (start, length) covering 0..cap inclusive."""
    for start in range(0, cap + 1, block):
        yield start, min(block, cap + 1 - start)


def residue_block(mantissa: int, q0: int, length: int) -> np.ndarray:
    """(q * mantissa) mod 2**SCAN_BITS for q = q0, ..., q0+length-1, as uint64."""
    mask = (1 << SCAN_BITS) - 1
    base = np.uint64((q0 * mantissa) & mask)
    step = np.uint64(mantissa & mask)
    ks = np.arange(length, dtype=np.uint64)
    # ks * step < 2**(15+48) < 2**63, so the product is exact in uint64.
    r = (ks * step) & _MASK
    r = (r + base) & _MASK
    return r


def negate_residues(r: np.ndarray) -> np.ndarray:
    """Residues of -q given residues of q: (2**B - r) mod 2**B."""
    return (np.uint64(1 << SCAN_BITS) - r) & _MASK


def residues_to_unit(r: np.ndarray) -> np.ndarray:
    """Map uint64 residues to floats in [0, 1)."""
    return r.astype(np.float64) * _SCALE
