"""Effective simultaneous approximation on the torus by integer multiples.

For the vector (2^(1/(N+1)), ..., 2^(N/(N+1))) there is an explicit bound

    |q| <= (N+1)^(2N+3) * (2/eps)^N

on the integer q needed to bring every frac(q * 2^(i/(N+1))) within eps of
arbitrary targets b_i in [0,1).  This module computes that bound exactly,
evaluates certified discrepancies, and searches for a witness q: an
exhaustive scan in the canonical order 0, +1, -1, +2, -2, ... (which makes
the returned q the minimal-|q| witness, positive preferred at ties), and a
seeded random strategy for ranges where the bound is unscannable.

Accept / reject decisions are rigorous: candidates run through a uint64
sieve with a conservative torus-distance rejection margin, and every
survivor is certified with exact rational interval bounds, escalating
precision on ambiguity.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._scan import (
    SCAN_BITS,
    iter_blocks,
    negate_residues,
    residue_block,
    residues_to_unit,
    scan_position,
)
from ._util import as_fraction
from .fixedpoint import (
    PRECISION_CAP,
    FixedPoint,
    PrecisionCapError,
    _root_mantissa,
    frac_mult_interval,
    required_bits,
)

QUARTER = Fraction(1, 4)


@dataclass(frozen=True)
class TargetVector:
    """N target points b_1..b_N on [0, 1), stored as exact rationals."""

    values: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("need at least one target")
        for b in self.values:
            if not (0 <= b < 1):
                raise ValueError(f"target {b} outside [0, 1)")

    @classmethod
    def from_values(cls, values) -> "TargetVector":
        return cls(tuple(as_fraction(v) for v in values))

    @property
    def n(self) -> int:
        return len(self.values)

    def as_floats(self) -> list[float]:
        return [float(b) for b in self.values]


@dataclass(frozen=True)
class SearchConfig:
    """Parameters of one weight search.

    eps: tolerance (any rational-like; floats are taken at their exact
    binary value).  q_cap: scan limit on |q|.  strategy: 'exhaustive' or
    'random'.  sample_budget only applies to the random strategy, whose
    candidates come from one seeded stream so results do not depend on the
    worker count.
    """

    eps: Fraction
    q_cap: int
    strategy: str = "exhaustive"
    seed: int = 0
    sample_budget: int = 100_000
    workers: int = 1
    precision_cap: int = PRECISION_CAP

    def __post_init__(self):
        object.__setattr__(self, "eps", as_fraction(self.eps))
        if not (0 < self.eps):
            raise ValueError("eps must be positive")
        if self.q_cap < 1:
            raise ValueError("q_cap must be >= 1")
        if self.strategy not in ("exhaustive", "random"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class SearchResult:
    weight: int
    discrepancy_bound: Fraction  # certified upper bound, <= eps of the search
    scanned: int  # candidates enumerated up to and including the hit
    precision_bits: int


class SearchNotFound(Exception):
    """No candidate within the scanned range satisfied the tolerance.

    Carries the scanned range as a certificate.
    """

    def __init__(self, eps: Fraction, q_cap: int, scanned: int, strategy: str):
        self.eps = eps
        self.q_cap = q_cap
        self.scanned = scanned
        self.strategy = strategy
        super().__init__(
            f"no weight with certified discrepancy <= {eps} found "
            f"({strategy} strategy, |q| <= {q_cap}, {scanned} candidates)"
        )


def weight_bound(n_targets: int, eps) -> int:
    """ceil((N+1)^(2N+3) * (2/eps)^N), computed in exact rationals.

    This bound is hyper-exponential in N; it overflows fixed-width
    integers almost immediately, so everything stays big-int/rational
    and the ceiling is taken last.
    """
    if n_targets < 1:
        raise ValueError("n_targets must be >= 1")
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    value = Fraction(n_targets + 1) ** (2 * n_targets + 3) * (2 / eps) ** n_targets
    return math.ceil(value)


def discrepancy(weight: int, targets: TargetVector, frac_bits: int) -> tuple[Fraction, Fraction]:
    """Certified enclosure of max_i |frac(weight * 2^(i/(N+1))) - b_i|.

    Plain absolute difference (not wrap-around distance).  The interval is
    the enclosure of the max: [max_i lower_i, max_i upper_i].
    """
    degree = targets.n + 1
    lower = Fraction(0)
    upper = Fraction(0)
    for idx, b in enumerate(targets.values, start=1):
        alpha = FixedPoint(_root_mantissa(idx, degree, frac_bits), frac_bits)
        plo, phi = frac_mult_interval(weight, alpha).abs_diff_bounds(b)
        lower = max(lower, plo)
        upper = max(upper, phi)
    return lower, upper


def _start_bits(q_cap: int, eps: Fraction) -> int:
    # One-sided errors make most candidates decidable at radius eps/8.
    target = min(eps / 8, QUARTER)
    return max(required_bits(max(q_cap, 1), target), 8)


def _decide(
    weight: int,
    targets: TargetVector,
    eps: Fraction,
    frac_bits: int,
    precision_cap: int,
) -> tuple[bool, Fraction, int]:
    """Certified accept/reject of one candidate, escalating on ambiguity."""
    bits = frac_bits
    while True:
        lower, upper = discrepancy(weight, targets, bits)
        if upper <= eps:
            return True, upper, bits
        if lower > eps:
            return False, lower, bits
        bits *= 2
        if bits > precision_cap:
            raise PrecisionCapError(
                f"discrepancy of q={weight} straddles eps={eps} beyond {precision_cap} bits"
            )


def _block_candidates(mantissas, b_floats, eps_cut, k0, length) -> list[int]:
    """Sieve one block of |q| values; emit survivors in canonical order.

    Rejection is rigorous: the true fractional part lies within torus
    distance |q| * 2**-SCAN_BITS of the residue, plain |x - b| dominates
    torus distance, and the guard absorbs every float conversion.
    """
    alive_pos = np.ones(length, dtype=bool)
    alive_neg = np.ones(length, dtype=bool)
    cut = eps_cut + (k0 + length) * 2.0 ** -SCAN_BITS + 2.0 ** -40
    for mantissa, b in zip(mantissas, b_floats):
        residues = residue_block(mantissa, k0, length)
        for r, alive in ((residues, alive_pos), (negate_residues(residues), alive_neg)):
            if not alive.any():
                continue
            t = np.abs(residues_to_unit(r) - b)
            np.minimum(t, 1.0 - t, out=t)
            alive &= t <= cut
    out = []
    for j in np.nonzero(alive_pos | alive_neg)[0]:
        k = k0 + int(j)
        if alive_pos[j]:
            out.append(k)
        if alive_neg[j] and k != 0:
            out.append(-k)
    return out


def _search_exhaustive(targets: TargetVector, cfg: SearchConfig) -> SearchResult:
    degree = targets.n + 1
    mantissas = [_root_mantissa(i, degree, SCAN_BITS) for i in range(1, degree)]
    b_floats = targets.as_floats()
    eps_cut = float(cfg.eps) + 1e-9
    start_bits = _start_bits(cfg.q_cap, cfg.eps)
    blocks = list(iter_blocks(cfg.q_cap))

    def sieve(block):
        k0, length = block
        return _block_candidates(mantissas, b_floats, eps_cut, k0, length)

    def certify(candidates):
        for w in candidates:
            accepted, bound, bits = _decide(w, targets, cfg.eps, start_bits, cfg.precision_cap)
            if accepted:
                return SearchResult(
                    weight=w,
                    discrepancy_bound=bound,
                    scanned=scan_position(w),
                    precision_bits=bits,
                )
        return None

    if cfg.workers <= 1:
        for block in blocks:
            result = certify(sieve(block))
            if result is not None:
                return result
    else:
        # Blocks are sieved in waves but certified strictly in canonical
        # block order, so the outcome does not depend on the worker count.
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for wave_start in range(0, len(blocks), cfg.workers):
                wave = blocks[wave_start : wave_start + cfg.workers]
                for candidates in pool.map(sieve, wave):
                    result = certify(candidates)
                    if result is not None:
                        return result
    raise SearchNotFound(cfg.eps, cfg.q_cap, 2 * cfg.q_cap + 1, "exhaustive")


def _canonical_key(weight: int):
    return (abs(weight), 0 if weight >= 0 else 1)


def _search_random(targets: TargetVector, cfg: SearchConfig) -> SearchResult:
    if cfg.q_cap >= 1 << 62:
        raise ValueError("random strategy requires q_cap < 2**62")
    degree = targets.n + 1
    mantissas = [_root_mantissa(i, degree, SCAN_BITS) for i in range(1, degree)]
    b_floats = targets.as_floats()
    eps_cut = float(cfg.eps) + 1e-9
    start_bits = _start_bits(cfg.q_cap, cfg.eps)
    mask = (1 << SCAN_BITS) - 1
    scale = 2.0 ** -SCAN_BITS

    rng = np.random.default_rng(cfg.seed)
    draws = rng.integers(-cfg.q_cap, cfg.q_cap, size=cfg.sample_budget, endpoint=True)

    best = None
    for q in draws:
        q = int(q)
        guard = abs(q) * scale + 2.0 ** -40
        plausible = True
        for mantissa, b in zip(mantissas, b_floats):
            c = ((q * mantissa) & mask) * scale
            t = abs(c - b)
            t = min(t, 1.0 - t)
            if t > eps_cut + guard:
                plausible = False
                break
        if not plausible:
            continue
        accepted, bound, bits = _decide(q, targets, cfg.eps, start_bits, cfg.precision_cap)
        if accepted:
            key = (bound, *_canonical_key(q))
            if best is None or key < best[0]:
                best = (key, q, bound, bits)
    if best is None:
        raise SearchNotFound(cfg.eps, cfg.q_cap, cfg.sample_budget, "random")
    _, q, bound, bits = best
    return SearchResult(
        weight=q, discrepancy_bound=bound, scanned=cfg.sample_budget, precision_bits=bits
    )


def search_weight(targets: TargetVector, config: SearchConfig) -> SearchResult:
    """Find an integer weight whose certified discrepancy is <= eps.

    Exhaustive strategy returns the canonical first hit (minimal |q|,
    positive before negative at ties); random strategy returns the best
    certified hit among the seeded draws.  Raises SearchNotFound with the
    scanned range as a certificate, or PrecisionCapError if a candidate
    cannot be decided within the precision cap.
    """
    if config.strategy == "exhaustive":
        return _search_exhaustive(targets, config)
    return _search_random(targets, config)


def min_weight_oracle(targets: TargetVector, eps, precision_cap: int = PRECISION_CAP) -> int:
    """Reference oracle: the minimal |q| with certified discrepancy <= eps.

    A deliberately plain sequential scan in canonical order over the full
    guaranteed range [-weight_bound, weight_bound]; used to validate
    search_weight and the covering bound empirically.  Only feasible when
    that bound is scannable (small N).
    """
    eps = as_fraction(eps)
    cap = weight_bound(targets.n, eps)
    bits = _start_bits(cap, eps)
    for k in range(cap + 1):
        for weight in (k,) if k == 0 else (k, -k):
            accepted, _, _ = _decide(weight, targets, eps, bits, precision_cap)
            if accepted:
                return k
    raise SearchNotFound(eps, cap, 2 * cap + 1, "exhaustive")
