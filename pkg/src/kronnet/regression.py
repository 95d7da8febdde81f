"""Nonparametric regression with the one-integer-weight network class.

Model: Y = f0(X) + noise with X uniform on [0,1]^d (the design law is a
config choice surfaced here) and standard normal noise, generated by
numpy's seeded PCG64 generator.  The empirical risk of a candidate weight
decomposes over grid cells through per-cell sufficient statistics
(count, sum Y, sum Y^2), which makes one candidate cost O(N) instead of
O(n) and allows exhaustive scans over 10^7 candidates.  The scan itself
runs on vectorized fixed-point residues and every near-minimal candidate
(plus every candidate whose residue could sit on the wrong side of the
0/1 seam) is re-ranked with the certified evaluator, canonical tie-break:
smallest |q|, positive first.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._scan import SCAN_BITS, iter_blocks, negate_residues, residue_block, residues_to_unit
from ._util import as_fraction, check_unit_array
from .fixedpoint import nth_root_floor
from .holder import HolderSpec, TargetFunction
from .network import (
    OUTPUT_TOL_BITS,
    NetworkParams,
    _frac_center,
    cell_of_index,
    grid_index_batch,
    value_table,
)


@dataclass(frozen=True)
class Dataset:
    """Regression samples, columnar: X is (n, d) in [0,1]^d, y is (n,)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = check_unit_array(self.X)
        y = np.asarray(self.y, dtype=np.float64)
        if y.shape != (X.shape[0],):
            raise ValueError(f"y shape {y.shape} does not match {X.shape[0]} samples")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def generate_data(f0: TargetFunction, n: int, seed) -> Dataset:
    """n iid samples: X uniform on the cube, Y = f0(X) + standard normal.

    The generator is numpy's default_rng (PCG64; normals by ziggurat),
    fully determined by the seed; identical seeds give bit-identical data.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng(seed)
    X = rng.random((n, f0.d))
    noise = rng.standard_normal(n)
    y = (np.asarray(f0(X)) if n else np.zeros(0)) + noise
    return Dataset(X=X, y=y)


@dataclass(frozen=True)
class CellStats:
    """Per-cell sufficient statistics for the squared-error risk."""

    M: int
    d: int
    counts: np.ndarray  # int64, length N
    sums: np.ndarray  # sum of Y per cell
    sumsq: np.ndarray  # sum of Y^2 per cell

    @property
    def n_cells(self) -> int:
        return (self.M + 1) ** self.d

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def cell_statistics(data: Dataset, M: int) -> CellStats:
    """Bin samples by grid cell; exact sums (ordered float accumulation)."""
    n_cells = (M + 1) ** data.d
    if data.n == 0:
        zero = np.zeros(n_cells)
        return CellStats(M, data.d, np.zeros(n_cells, dtype=np.int64), zero, zero.copy())
    idx = grid_index_batch(data.X, M) - 1
    counts = np.bincount(idx, minlength=n_cells).astype(np.int64)
    sums = np.bincount(idx, weights=data.y, minlength=n_cells)
    sumsq = np.bincount(idx, weights=data.y * data.y, minlength=n_cells)
    return CellStats(M, data.d, counts, sums, sumsq)


def empirical_risk(weight: int, stats: CellStats, K: float, tol_bits: int = OUTPUT_TOL_BITS) -> float:
    """sum_i (Y_i - Z(X_i))^2 via the per-cell decomposition.

    With v_i the network value on cell i this equals
    sum_cells (sumsq - 2 v_i sum + count v_i^2), an identity (not an
    approximation) because the network is constant on each cell.
    """
    total = float(stats.sumsq.sum())
    n_cells = stats.n_cells
    for j in np.nonzero(stats.counts)[0]:
        center, _ = _frac_center(weight, int(j) + 1, n_cells, tol_bits)
        v = 2.0 * K * float(center) - K
        total += float(stats.counts[j]) * v * v - 2.0 * float(stats.sums[j]) * v
    return total


@dataclass(frozen=True)
class ERMConfig:
    """Scan configuration for the empirical risk minimizer."""

    M: int
    q_cap: int
    strategy: str = "exhaustive"
    seed: int = 0
    sample_budget: int = 100_000
    workers: int = 1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")
        if self.q_cap < 1:
            raise ValueError("q_cap must be >= 1")
        if self.strategy not in ("exhaustive", "random"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def _canonical_key(weight: int):
    return (abs(weight), 0 if weight >= 0 else 1)


def _shortlist_margin(stats: CellStats, K: float, q_cap: int) -> float:
    # |risk_approx - risk_exact| <= dv * (2 sum|s_i| + 2 K n) + n dv^2
    # with dv the residue-induced error of one cell value; double it so the
    # exact argmin always survives the approximate cut.
    dv = 2.0 * K * (q_cap * 2.0 ** -SCAN_BITS + 2.0 ** -50)
    m1 = dv * (2.0 * float(np.abs(stats.sums).sum()) + 2.0 * K * stats.n) + stats.n * dv * dv
    return 2.0 * m1 + 1e-12


def _erm_block(mantissas, counts, sums, K, k0, length):
    """Approximate risks (constant term dropped) for |q| in [k0, k0+length),
    both signs, plus per-sign seam flags and the trusted block minimum."""
    risk_pos = np.zeros(length)
    risk_neg = np.zeros(length)
    seam_pos = np.zeros(length, dtype=bool)
    seam_neg = np.zeros(length, dtype=bool)
    guard = np.uint64(k0 + length)
    top = np.uint64((1 << SCAN_BITS)) - guard
    for mantissa, cnt, s in zip(mantissas, counts, sums):
        if cnt == 0:
            continue
        residues = residue_block(mantissa, k0, length)
        for r, risk, seam in (
            (residues, risk_pos, seam_pos),
            (negate_residues(residues), risk_neg, seam_neg),
        ):
            v = 2.0 * K * residues_to_unit(r) - K
            risk += float(cnt) * v * v - 2.0 * float(s) * v
            seam |= (r <= guard) | (r >= top)
    # A residue near the 0/1 seam may sit on the wrong side of it, so its
    # approximate risk is untrusted: keep such candidates out of the minima
    # (they always enter the certified shortlist instead).
    risk_pos[seam_pos] = np.inf
    risk_neg[seam_neg] = np.inf
    if k0 == 0:
        risk_neg[0] = np.inf  # -0 duplicates 0
        seam_neg[0] = False
    block_min = float(min(risk_pos.min(), risk_neg.min()))
    return block_min, risk_pos, risk_neg, seam_pos, seam_neg


def _erm_scan_exhaustive(stats: CellStats, K: float, cfg: ERMConfig) -> list[int]:
    n_cells = stats.n_cells
    degree = n_cells + 1
    mantissas = [nth_root_floor(1 << (i + degree * SCAN_BITS), degree) for i in range(1, degree)]
    margin = _shortlist_margin(stats, K, cfg.q_cap)
    blocks = list(iter_blocks(cfg.q_cap))

    def run(block):
        k0, length = block
        return k0, _erm_block(mantissas, stats.counts, stats.sums, K, k0, length)

    if cfg.workers <= 1:
        results = map(run, blocks)
    else:
        pool = ThreadPoolExecutor(max_workers=cfg.workers)
        results = pool.map(run, blocks)

    global_min = np.inf
    pool_candidates: list[tuple[float, int]] = []
    straddlers: set[int] = {0}
    for k0, (block_min, risk_pos, risk_neg, seam_pos, seam_neg) in results:
        global_min = min(global_min, block_min)
        for risks, seams, sign in ((risk_pos, seam_pos, 1), (risk_neg, seam_neg, -1)):
            near = np.nonzero(risks <= block_min + margin)[0]
            pool_candidates.extend((float(risks[j]), sign * (k0 + int(j))) for j in near)
            straddlers.update(sign * (k0 + int(j)) for j in np.nonzero(seams)[0])
    if cfg.workers > 1:
        pool.shutdown()

    shortlist = {q for approx, q in pool_candidates if approx <= global_min + margin}
    shortlist |= straddlers
    return sorted(shortlist, key=_canonical_key)


def _erm_scan_random(stats: CellStats, K: float, cfg: ERMConfig) -> list[int]:
    n_cells = stats.n_cells
    degree = n_cells + 1
    mantissas = [nth_root_floor(1 << (i + degree * SCAN_BITS), degree) for i in range(1, degree)]
    live = [(m, int(c), float(s)) for m, c, s in zip(mantissas, stats.counts, stats.sums) if c > 0]
    margin = _shortlist_margin(stats, K, cfg.q_cap)
    mask = (1 << SCAN_BITS) - 1
    scale = 2.0 ** -SCAN_BITS

    rng = np.random.default_rng(cfg.seed)
    draws = rng.integers(-cfg.q_cap, cfg.q_cap, size=cfg.sample_budget, endpoint=True)

    best = np.inf
    pool_candidates: list[tuple[float, int]] = []
    straddlers: set[int] = {0}
    for q in draws:
        q = int(q)
        guard = abs(q) + 1
        risk = 0.0
        seam = False
        for mantissa, cnt, s in live:
            r = (q * mantissa) & mask
            v = 2.0 * K * (r * scale) - K
            risk += cnt * v * v - 2.0 * s * v
            seam = seam or r <= guard or r >= (mask + 1) - guard
        if seam:
            # untrusted approximation near the seam: certify unconditionally
            straddlers.add(q)
            continue
        best = min(best, risk)
        if risk <= best + margin:
            pool_candidates.append((risk, q))
    shortlist = {q for approx, q in pool_candidates if approx <= best + margin}
    shortlist |= straddlers
    return sorted(shortlist, key=_canonical_key)


def erm_fit(data: Dataset, K: float, config: ERMConfig) -> tuple[int, float]:
    """Minimize the empirical squared-error risk over scanned weights.

    Returns (weight, risk).  The minimizer is over the scanned set (the
    full class only when the cap reaches the theoretical bound and the
    strategy is exhaustive); ties break canonically.
    """
    if data.n < 1:
        raise ValueError("need at least one sample")
    stats = cell_statistics(data, config.M)
    if config.strategy == "exhaustive":
        shortlist = _erm_scan_exhaustive(stats, K, config)
    else:
        shortlist = _erm_scan_random(stats, K, config)
    best_q = None
    best_key = None
    for q in shortlist:
        key = (empirical_risk(q, stats, K), *_canonical_key(q))
        if best_key is None or key < best_key:
            best_key = key
            best_q = q
    return best_q, best_key[0]


@dataclass(frozen=True)
class Schedule:
    """Sample-size driven mesh and weight range for the ERM class."""

    n: int
    M: int
    n_cells: int
    weight_bound: int  # astronomically large for moderate n; see digits

    @property
    def digits(self) -> int:
        return len(str(self.weight_bound))


def _min_power_at_least(power: int, rhs_num: int, rhs_den: int, guess: int) -> int:
    """Smallest m >= 1 with m**power * rhs_den >= rhs_num (exact)."""
    m = max(1, guess)
    while m**power * rhs_den < rhs_num:
        m += 1
    while m > 1 and (m - 1) ** power * rhs_den >= rhs_num:
        m -= 1
    return m


def schedule(n: int, spec: HolderSpec, d: int) -> Schedule:
    """Mesh M_n = ceil((2F)^(1/beta) n^(1/(2beta+d))) and the weight range
    Q_n = ceil((N+1)^(2N+3) (8K n^(beta/(2beta+d)))^N), N = (M_n+1)^d.

    Exact big-integer ceilings for rational beta (float fallback otherwise).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    beta = as_fraction(spec.beta)
    two_f = 2 * as_fraction(spec.F)
    K = as_fraction(spec.K)

    if beta.denominator <= 64 and beta.numerator <= 64:
        p, s = beta.numerator, beta.denominator
        u = 2 * p + d * s  # (2*beta + d) * s
        guess = int(float(two_f) ** (1.0 / float(beta)) * n ** (s / u)) + 1
        M = _min_power_at_least(
            p * u,
            two_f.numerator ** (s * u) * n ** (s * p),
            two_f.denominator ** (s * u),
            guess,
        )
        n_cells = (M + 1) ** d
        c_num = (n_cells + 1) ** (2 * n_cells + 3) * 8**n_cells * K.numerator**n_cells
        rhs_num = c_num**u * n ** (n_cells * p)
        rhs_den = K.denominator ** (n_cells * u)
        guess_q = nth_root_floor(rhs_num // rhs_den, u)
        Q = _min_power_at_least(u, rhs_num, rhs_den, guess_q)
        return Schedule(n=n, M=M, n_cells=n_cells, weight_bound=Q)

    # Irrational / huge-denominator beta: guarded float evaluation.
    b = float(spec.beta)
    M = max(1, math.ceil(float(two_f) ** (1.0 / b) * n ** (1.0 / (2 * b + d)) - 1e-12))
    n_cells = (M + 1) ** d
    q = math.ceil(
        float(n_cells + 1) ** (2 * n_cells + 3) * (8 * float(K) * n ** (b / (2 * b + d))) ** n_cells
    )
    return Schedule(n=n, M=M, n_cells=n_cells, weight_bound=q)


def prediction_error_mc(
    params: NetworkParams, f0: TargetFunction, n_mc: int, seed, method: str = "mc"
) -> float:
    """Expected squared error of the network against f0 at a fresh design point.

    method='mc' averages over n_mc fresh uniform points; method='quadrature'
    integrates (v_i - f0)^2 per cell with fixed-order Gauss-Legendre nodes
    (both piecewise pieces are smooth, so the fixed order is ample).
    """
    if method == "mc":
        if n_mc < 1:
            raise ValueError("n_mc must be >= 1")
        rng = np.random.default_rng(seed)
        X = rng.random((n_mc, params.d))
        table = value_table(params)
        z = table[grid_index_batch(X, params.M) - 1]
        diff = z - np.asarray(f0(X))
        return float(np.mean(diff * diff))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")

    nodes, weights = np.polynomial.legendre.leggauss(16)
    table = value_table(params)
    total = 0.0
    for i in range(1, params.n_cells + 1):
        cell = cell_of_index(i, params.M, params.d)
        if cell.volume == 0.0:
            continue
        axes = []
        wts = []
        for lo, hi in zip(cell.lower, cell.upper):
            half = (hi - lo) / 2.0
            axes.append(lo + half * (nodes + 1.0))
            wts.append(weights * half)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        w = np.ones(1)
        for wt in wts:
            w = np.multiply.outer(w, wt).ravel()
        diff = table[i - 1] - np.asarray(f0(pts))
        total += float(np.sum(w * diff * diff))
    return total


def covering_log2(weight_cap: int) -> float:
    """log2 of the class cardinality 2*Q + 1 (exact big-int log, ~1 ulp)."""
    if weight_cap < 0:
        raise ValueError("weight_cap must be >= 0")
    return math.log2(2 * weight_cap + 1)


def risk_bound(delta, n: int, weight_cap: int, approx_err_sq, K) -> float:
    """Oracle-inequality prediction-error bound.

    4 * [ approx_err_sq + K^2 (18 log2(2Q+1) + 72) / n + 32 delta K ],
    evaluated in exact rationals (the log term enters at its exact binary
    float value) and rounded once at the end.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    log_term = as_fraction(covering_log2(weight_cap))
    value = 4 * (
        as_fraction(approx_err_sq)
        + as_fraction(K) ** 2 * (18 * log_term + 72) / n
        + 32 * as_fraction(delta) * as_fraction(K)
    )
    return float(value)


@dataclass(frozen=True)
class RateRow:
    n: int
    M: int
    n_cells: int
    weight_bound_digits: int
    q_cap: int
    weights: tuple[int, ...]
    risks: tuple[float, ...]
    errors: tuple[float, ...]
    mean_error: float
    sd_error: float
    bound: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "M": self.M,
            "n_cells": self.n_cells,
            "weight_bound_digits": self.weight_bound_digits,
            "q_cap": self.q_cap,
            "weights": list(self.weights),
            "risks": list(self.risks),
            "errors": list(self.errors),
            "mean_error": self.mean_error,
            "sd_error": self.sd_error,
            "risk_bound": self.bound,
        }


@dataclass(frozen=True)
class RateReport:
    """Per-n Monte-Carlo prediction errors and the fitted log-log slope.

    The error for each seed conditions on that seed's single training draw
    and averages over fresh design points; the reported mean/sd aggregate
    across seeds.  Slope comes from least squares on (log n, log mean error).
    """

    rows: tuple[RateRow, ...]
    seeds: tuple[int, ...]
    mc_size: int
    theoretical_exponent: float
    fitted_slope: float | None

    def to_dict(self) -> dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "seeds": list(self.seeds),
            "mc_size": self.mc_size,
            "theoretical_exponent": self.theoretical_exponent,
            "fitted_slope": self.fitted_slope,
        }


def _derived_seed(seed: int, n: int, tag: int) -> list[int]:
    return [seed, n, tag]


def rate_study(
    n_list,
    f0: TargetFunction,
    spec: HolderSpec | None = None,
    seeds=range(10),
    q_caps=10_000_000,
    mc_size: int = 100_000,
    mc_method: str = "mc",
    workers: int = 1,
) -> RateReport:
    """Prediction error vs sample size for the scheduled ERM estimator.

    The theoretical weight range is hyper-exponential in the cell count
    and unscannable beyond tiny n, so scans are capped (per-n caps allowed)
    and both cap and theoretical digit count are reported per row.
    """
    spec = spec or f0.spec
    n_list = [int(n) for n in n_list]
    seeds = [int(s) for s in seeds]
    if not n_list:
        raise ValueError("n_list must not be empty")
    caps = list(q_caps) if not isinstance(q_caps, int) else [q_caps] * len(n_list)
    if len(caps) != len(n_list):
        raise ValueError("need one q_cap per n")

    d = f0.d
    beta = float(spec.beta)
    rows = []
    for n, cap in zip(n_list, caps):
        sched = schedule(n, spec, d)
        cap_used = min(cap, sched.weight_bound)
        weights = []
        risks = []
        errors = []
        for seed in seeds:
            data = generate_data(f0, n, seed=_derived_seed(seed, n, 0))
            q_hat, risk = erm_fit(
                data,
                spec.K,
                ERMConfig(M=sched.M, q_cap=cap_used, seed=seed, workers=workers),
            )
            params = NetworkParams(d=d, K=spec.K, M=sched.M, q=q_hat)
            err = prediction_error_mc(
                params, f0, mc_size, seed=_derived_seed(seed, n, 1), method=mc_method
            )
            weights.append(q_hat)
            risks.append(risk)
            errors.append(err)
        approx_sq = float(n) ** (-2.0 * beta / (2.0 * beta + d))
        rows.append(
            RateRow(
                n=n,
                M=sched.M,
                n_cells=sched.n_cells,
                weight_bound_digits=sched.digits,
                q_cap=cap_used,
                weights=tuple(weights),
                risks=tuple(risks),
                errors=tuple(errors),
                mean_error=float(np.mean(errors)),
                sd_error=float(np.std(errors, ddof=1)) if len(errors) > 1 else 0.0,
                bound=risk_bound(Fraction(1, n), n, sched.weight_bound, approx_sq, spec.K),
            )
        )

    slope = None
    if len(rows) >= 2:
        logs_n = np.log([row.n for row in rows])
        logs_e = np.log([row.mean_error for row in rows])
        slope = float(np.polyfit(logs_n, logs_e, 1)[0])
    return RateReport(
        rows=tuple(rows),
        seeds=tuple(seeds),
        mc_size=mc_size,
        theoretical_exponent=-2.0 * beta / (2.0 * beta + d),
        fitted_slope=slope,
    )


def format_decimal(value: float) -> str:
    """Positional decimal notation, shortest string that round-trips exactly."""
    return np.format_float_positional(float(value), unique=True)


def write_dataset_csv(path, data: Dataset) -> None:
    """CSV with header x1,...,xd,y; one sample per row, decimal notation."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{k + 1}" for k in range(data.d)] + ["y"])
        for xi, yi in zip(data.X, data.y):
            writer.writerow([format_decimal(v) for v in xi] + [format_decimal(yi)])


def read_dataset_csv(path) -> Dataset:
    """Parse a dataset CSV; malformed rows are reported with line numbers."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty dataset file") from None
        d = len(header) - 1
        expected = [f"x{k + 1}" for k in range(d)] + ["y"]
        if d < 1 or [h.strip() for h in header] != expected:
            raise ValueError(f"line 1: expected header {','.join(expected) if d >= 1 else 'x1,...,y'}, got {','.join(header)}")
        xs = []
        ys = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise ValueError(f"line {lineno}: expected {d + 1} fields, got {len(row)}")
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric field in {row}") from None
            xs.append(values[:d])
            ys.append(values[d])
    X = np.asarray(xs, dtype=np.float64).reshape(len(xs), d)
    return Dataset(X=X, y=np.asarray(ys, dtype=np.float64))
