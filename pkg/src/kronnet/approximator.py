"""Constructive sup-norm approximation of Holder functions by one weight.

Pipeline: pick the mesh M from (eps, beta, F), take the center of each of
the N = (M+1)^d grid cells as its representative, rescale the function
values there to torus targets b_i = (f(y_i)+K)/(2K), and search for an
integer weight hitting every target within eps/(4K).  The accepted weight
then satisfies, cell by cell,

    |Z(x) - f(x)| <= eps/2 + F * |y_i - x|_inf^beta <= eps,

with the cross-cell term at most F * (2M)^-beta for centered
representatives.  Both the finite-grid error estimate and that analytic
bound are reported; the sup over the continuum is certified by the chain
above, not by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._util import as_fraction, check_unit_array
from .fixedpoint import PRECISION_CAP, nth_root_floor
from .holder import FunctionBoundError, HolderSpec, TargetFunction
from .kronecker import SearchConfig, SearchResult, TargetVector, search_weight, weight_bound
from .network import NetworkParams, cell_of_index, forward_batch

_DEFAULT_GRID = {1: 4096, 2: 256}


def mesh_size(eps, spec: HolderSpec) -> int:
    """ceil((2F/eps)^(1/beta)), with exact-integer boundaries honored.

    For rational beta with small denominator the ceiling is resolved by
    exact integer-root comparisons, so a boundary case like 2F/eps = 4,
    beta = 1 yields exactly 4 and never 5 from float noise.
    """
    ratio = 2 * as_fraction(spec.F) / as_fraction(eps)
    if ratio <= 1:
        return 1
    beta = as_fraction(spec.beta)
    if beta.denominator <= 64 and beta.numerator <= 64:
        p, r = beta.numerator, beta.denominator
        target = ratio**r
        # Smallest M with M^p >= target.
        guess = max(1, nth_root_floor(target.numerator // target.denominator, p))
        while Fraction(guess) ** p < target:
            guess += 1
        while guess > 1 and Fraction(guess - 1) ** p >= target:
            guess -= 1
        return guess
    return max(1, math.ceil(float(ratio) ** (1.0 / float(spec.beta)) - 1e-12))


def cell_representatives(M: int, d: int) -> list[tuple[float, ...]]:
    """Cell centers in enumeration order i = 1..N (degenerate faces give 1.0)."""
    n_cells = (M + 1) ** d
    return [cell_of_index(i, M, d).center for i in range(1, n_cells + 1)]


def targets_from_function(f: TargetFunction, reps, K) -> TargetVector:
    """Torus targets b_i = (f(y_i) + K) / (2K), exact rationals in (0, 1).

    Rejects any representative where |f| >= K: such a function is outside
    its declared class and no guarantee survives.
    """
    K_exact = as_fraction(K)
    values = []
    for y in reps:
        v = as_fraction(float(f(y)))
        if abs(v) >= K_exact:
            raise FunctionBoundError(
                f"|f({tuple(y)})| = {float(abs(v)):.6g} >= K = {float(K_exact):.6g}"
            )
        values.append((v + K_exact) / (2 * K_exact))
    return TargetVector(tuple(values))


@dataclass(frozen=True)
class ApproximationReport:
    eps: float
    M: int
    n_cells: int
    inner_tolerance: Fraction  # eps / (4K), the per-target tolerance
    weight: int
    weight_bound: int  # guaranteed search range at the inner tolerance
    anchor_error_bound: float  # certified |Z(y_i) - f(y_i)| bound, <= eps/2
    grid_sup_error: float
    analytic_bound: float  # eps/2 + F * (2M)^-beta, >= true sup error
    grid_resolution: int
    search: SearchResult

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "M": self.M,
            "n_cells": self.n_cells,
            "inner_tolerance": str(self.inner_tolerance),
            "weight": self.weight,
            "weight_bound": {
                "decimal": str(self.weight_bound),
                "digits": len(str(self.weight_bound)),
            },
            "anchor_error_bound": self.anchor_error_bound,
            "grid_sup_error": self.grid_sup_error,
            "analytic_bound": self.analytic_bound,
            "grid_resolution": self.grid_resolution,
            "search": {
                "weight": self.search.weight,
                "discrepancy_bound": str(self.search.discrepancy_bound),
                "scanned": self.search.scanned,
                "precision_bits": self.search.precision_bits,
            },
        }


def sup_error_grid(params: NetworkParams, f, resolution: int | None = None) -> float:
    """max |Z(x) - f(x)| over a resolution^d uniform grid including 0 and 1.

    The grid brushes every cell boundary; resolution >= 4M recommended.
    f may be a TargetFunction or any vectorized callable (n, d) -> (n,).
    """
    d = params.d
    if resolution is None:
        resolution = _DEFAULT_GRID.get(d, 64)
    axis = np.linspace(0.0, 1.0, resolution)
    worst = 0.0
    if d == 1:
        X = axis.reshape(-1, 1)
        z = np.asarray(forward_batch(params, X))
        worst = float(np.max(np.abs(z - np.asarray(f(X)))))
        return worst
    # Chunk along the first axis to bound memory for d >= 2.
    rest = np.array(
        np.meshgrid(*([axis] * (d - 1)), indexing="ij"), dtype=np.float64
    ).reshape(d - 1, -1).T
    for x0 in axis:
        X = np.column_stack([np.full(len(rest), x0), rest])
        z = np.asarray(forward_batch(params, X))
        worst = max(worst, float(np.max(np.abs(z - np.asarray(f(X))))))
    return worst


def build_approximant(
    f: TargetFunction,
    eps,
    spec: HolderSpec | None = None,
    *,
    q_cap: int = 10_000_000,
    strategy: str = "exhaustive",
    seed: int = 0,
    workers: int = 1,
    sample_budget: int = 100_000,
    precision_cap: int = PRECISION_CAP,
    grid_resolution: int | None = None,
) -> tuple[NetworkParams, ApproximationReport]:
    """Run the whole pipeline for a target sup-norm error eps.

    Returns the network parameters and a report; SearchNotFound propagates
    with its scan certificate if no weight within q_cap works.
    """
    spec = spec or f.spec
    eps_exact = as_fraction(eps)
    if eps_exact <= 0:
        raise ValueError("eps must be positive")
    K = spec.K
    M = mesh_size(eps_exact, spec)
    d = f.d
    n_cells = (M + 1) ** d
    reps = cell_representatives(M, d)
    targets = targets_from_function(f, reps, K)
    inner_tol = eps_exact / (4 * as_fraction(K))
    config = SearchConfig(
        eps=inner_tol,
        q_cap=q_cap,
        strategy=strategy,
        seed=seed,
        sample_budget=sample_budget,
        workers=workers,
        precision_cap=precision_cap,
    )
    result = search_weight(targets, config)
    params = NetworkParams(d=d, K=float(K), M=M, q=result.weight)

    if grid_resolution is None:
        grid_resolution = _DEFAULT_GRID.get(d, 64)
    grid_err = sup_error_grid(params, f, grid_resolution)
    analytic = float(eps_exact) / 2.0 + spec.F * (2.0 * M) ** -spec.beta
    report = ApproximationReport(
        eps=float(eps_exact),
        M=M,
        n_cells=n_cells,
        inner_tolerance=inner_tol,
        weight=result.weight,
        weight_bound=weight_bound(n_cells, inner_tol),
        anchor_error_bound=2.0 * float(K) * float(result.discrepancy_bound),
        grid_sup_error=grid_err,
        analytic_bound=analytic,
        grid_resolution=grid_resolution,
        search=result,
    )
    return params, report


def approximation_grid_table(params: NetworkParams, f, resolution: int = 256) -> np.ndarray:
    """(x, f(x), Z(x)) rows on a uniform grid, for external plotting."""
    d = params.d
    axis = np.linspace(0.0, 1.0, resolution)
    if d == 1:
        X = axis.reshape(-1, 1)
    else:
        X = np.array(
            np.meshgrid(*([axis] * d), indexing="ij"), dtype=np.float64
        ).reshape(d, -1).T
        X = check_unit_array(X, d)
    fx = np.asarray(f(X))
    zx = np.asarray(forward_batch(params, X))
    return np.column_stack([X, fx, zx])
