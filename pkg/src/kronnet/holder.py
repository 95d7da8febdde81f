"""Smoothness-declared target functions for approximation and regression runs.

Every registry entry carries a declared (beta, F, K): bounded by K in sup
norm and |f(x)-f(y)| <= F |x-y|_inf^beta.  Declarations are checked
numerically on a point grid when the entry is built, so a bad declaration
fails fast instead of silently breaking downstream error guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._util import check_unit_array


@dataclass(frozen=True)
class HolderSpec:
    """Smoothness beta, modulus constant F, strict sup-norm bound K."""

    beta: float
    F: float
    K: float

    def __post_init__(self):
        if not (self.beta > 0 and self.F > 0 and self.K > 0):
            raise ValueError("beta, F and K must all be positive")


class FunctionBoundError(ValueError):
    """A function value escaped its declared sup-norm bound K."""


@dataclass(frozen=True)
class TargetFunction:
    """A named function on [0,1]^d with its declared smoothness class.

    The evaluator is vectorized: an (n, d) array maps to an (n,) array; a
    single point maps to a float.
    """

    name: str
    d: int
    spec: HolderSpec
    params: dict = field(default_factory=dict)
    _eval: Callable = None

    def __call__(self, x):
        X = np.asarray(x, dtype=np.float64)
        if X.ndim <= 1:
            pt = np.atleast_1d(X).reshape(1, -1)
            if pt.shape[1] != self.d:
                raise ValueError(f"expected a point of dimension {self.d}")
            return float(self._eval(pt)[0])
        return np.asarray(self._eval(check_unit_array(X, self.d)), dtype=np.float64)


def _constant_builder(d, value=0.0):
    value = float(value)
    return (lambda X: np.full(X.shape[0], value)), 1.0, 1.0, abs(value)


def _affine_builder(d, intercept=0.0, slope=0.5):
    intercept, slope = float(intercept), float(slope)

    def evaluate(X):
        return intercept + slope * X.sum(axis=-1)

    sup = max(abs(intercept), abs(intercept + slope * d))
    return evaluate, 1.0, max(abs(slope) * d, 1e-9), sup


def _cosine_builder(d, amplitude=0.5, frequency=1.0):
    amplitude, frequency = float(amplitude), float(frequency)

    def evaluate(X):
        return amplitude * np.cos(frequency * X.sum(axis=-1))

    return evaluate, 1.0, max(abs(amplitude * frequency) * d, 1e-9), abs(amplitude)


def _product_builder(d, scale=1.0):
    scale = float(scale)

    def evaluate(X):
        return scale * X.prod(axis=-1)

    return evaluate, 1.0, max(abs(scale) * d, 1e-9), abs(scale)


REGISTRY = {
    "constant": _constant_builder,
    "affine": _affine_builder,
    "cosine": _cosine_builder,
    "product": _product_builder,
}


def _verify_declared(fn: TargetFunction, n_points: int = 512, n_pairs: int = 256):
    rng = np.random.default_rng(1234)
    pts = rng.random((n_points, fn.d))
    corners = np.array(
        np.meshgrid(*([[0.0, 1.0]] * fn.d), indexing="ij"), dtype=np.float64
    ).reshape(fn.d, -1).T
    pts = np.vstack([pts, corners])
    vals = fn(pts)
    if np.max(np.abs(vals)) >= fn.spec.K:
        raise FunctionBoundError(
            f"{fn.name}: |f| reaches {np.max(np.abs(vals)):.6g}, not strictly below K={fn.spec.K}"
        )
    xs = pts[rng.integers(0, len(pts), n_pairs)]
    ys = pts[rng.integers(0, len(pts), n_pairs)]
    dist = np.max(np.abs(xs - ys), axis=1)
    gap = np.abs(fn(xs) - fn(ys))
    allowed = fn.spec.F * dist**fn.spec.beta + 1e-9
    if np.any(gap > allowed):
        worst = np.argmax(gap - allowed)
        raise ValueError(
            f"{fn.name}: smoothness declaration violated "
            f"(gap {gap[worst]:.6g} > F*dist^beta {allowed[worst]:.6g})"
        )


def make_function(name: str, d: int, K: float = 1.0, beta=None, F=None, **params) -> TargetFunction:
    """Build and validate a registry function.

    K must strictly dominate the function's sup norm.  beta and F default
    to the entry's derived declaration but can be overridden (to a valid
    weaker declaration).
    """
    if name not in REGISTRY:
        raise ValueError(f"unknown function {name!r}; registry has {sorted(REGISTRY)}")
    if d < 1:
        raise ValueError("d must be >= 1")
    evaluate, default_beta, default_f, sup = REGISTRY[name](d, **params)
    K = float(K)
    if sup >= K:
        raise FunctionBoundError(
            f"{name}: sup |f| = {sup:.6g} is not strictly below K = {K:.6g}"
        )
    spec = HolderSpec(
        beta=float(beta) if beta is not None else default_beta,
        F=float(F) if F is not None else default_f,
        K=K,
    )
    fn = TargetFunction(name=name, d=d, spec=spec, params=dict(params), _eval=evaluate)
    _verify_declared(fn)
    return fn
