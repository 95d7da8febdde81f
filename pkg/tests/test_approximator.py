import math
from fractions import Fraction

import numpy as np
import pytest

from kronnet import (
    HolderSpec,
    NetworkParams,
    SearchNotFound,
    build_approximant,
    cell_representatives,
    forward,
    forward_batch,
    make_function,
    mesh_size,
    sup_error_grid,
    targets_from_function,
    weight_bound,
)


class TestMeshSize:
    def test_linear(self):
        assert mesh_size(0.5, HolderSpec(beta=1.0, F=1.0, K=1.0)) == 4

    def test_loose(self):
        assert mesh_size(2.0, HolderSpec(beta=1.0, F=1.0, K=1.0)) == 1

    def test_sqrt_smoothness(self):
        assert mesh_size(1.0, HolderSpec(beta=0.5, F=1.0, K=1.0)) == 4

    def test_exact_boundary_not_bumped(self):
        # 2F/eps = 4 exactly with beta = 1 must give 4, never 5
        assert mesh_size(Fraction(1, 2), HolderSpec(beta=1.0, F=1.0, K=1.0)) == 4
        assert mesh_size(Fraction(1, 4), HolderSpec(beta=2.0, F=2.0, K=1.0)) == 4

    def test_irrational_beta_fallback(self):
        m = mesh_size(0.5, HolderSpec(beta=0.7312498573, F=1.0, K=1.0))
        assert m == math.ceil(4.0 ** (1.0 / 0.7312498573))


def enumerate_centers(M, d):
    # independent digit-decomposition oracle for the cell centers
    # (midpoints written as (lo + hi) / 2 to match float rounding)
    out = []
    for i in range((M + 1) ** d):
        rem, pt = i, []
        for _ in range(d):
            m = rem % (M + 1)
            rem //= M + 1
            pt.append(1.0 if m == M else (m / M + (m + 1) / M) / 2)
        out.append(tuple(pt))
    return out


class TestCellRepresentatives:
    @pytest.mark.parametrize("M, d", [(1, 1), (4, 1), (1, 2), (2, 2), (3, 3)])
    def test_matches_enumeration(self, M, d):
        assert cell_representatives(M, d) == enumerate_centers(M, d)

    def test_values_1d(self):
        assert cell_representatives(1, 1) == [(0.5,), (1.0,)]
        assert cell_representatives(4, 1) == [(0.125,), (0.375,), (0.625,), (0.875,), (1.0,)]

    def test_values_2d(self):
        assert cell_representatives(1, 2) == [(0.5, 0.5), (1.0, 0.5), (0.5, 1.0), (1.0, 1.0)]


class TestTargetsFromFunction:
    def test_zero_function_midpoint(self):
        f = make_function("constant", d=1, value=0.0, K=1.0)
        targets = targets_from_function(f, cell_representatives(2, 1), 1.0)
        assert all(b == Fraction(1, 2) for b in targets.values)

    def test_half(self):
        f = make_function("constant", d=1, value=0.5, K=1.0)
        targets = targets_from_function(f, [(0.3,)], 1.0)
        assert targets.values[0] == Fraction(3, 4)

    def test_cosine_value(self):
        f = make_function("cosine", d=1, amplitude=0.5, frequency=2.0, K=1.0)
        targets = targets_from_function(f, [(0.1,)], 1.0)
        assert float(targets.values[0]) == pytest.approx((0.5 * math.cos(0.2) + 1) / 2, abs=1e-15)

    def test_rejects_out_of_class(self):
        from kronnet import FunctionBoundError

        f = make_function("constant", d=1, value=0.9, K=1.0)
        with pytest.raises(FunctionBoundError):
            targets_from_function(f, [(0.5,)], 0.5)


class TestBuildApproximant:
    def test_loose_eps_accepts_zero_weight(self):
        f = make_function("constant", d=1, value=0.0, K=1.0)
        network, report = build_approximant(f, 2.0, q_cap=50)
        assert network.q == 0
        assert report.grid_sup_error <= 2.0

    def test_cosine_build(self):
        f = make_function("cosine", d=1, amplitude=0.5, frequency=2.0, K=1.0)
        network, report = build_approximant(f, 0.5, q_cap=10_000_000, grid_resolution=512)
        assert report.M == 4 and report.n_cells == 5
        assert report.inner_tolerance == Fraction(1, 8)
        assert abs(network.q) <= report.weight_bound
        assert report.weight_bound == weight_bound(5, Fraction(1, 8))
        assert report.anchor_error_bound <= 0.25
        assert report.grid_sup_error <= report.analytic_bound <= 0.5
        # per-anchor accuracy at every representative
        for y in cell_representatives(4, 1):
            assert abs(forward(network, y) - f(y)) <= 0.25

    def test_not_found_propagates(self):
        f = make_function("cosine", d=1, amplitude=0.5, frequency=2.0, K=1.0)
        with pytest.raises(SearchNotFound):
            build_approximant(f, 0.05, q_cap=5)

    def test_rejects_nonpositive_eps(self):
        f = make_function("constant", d=1, value=0.0, K=1.0)
        with pytest.raises(ValueError):
            build_approximant(f, 0)


class TestSupErrorGrid:
    def test_network_against_itself(self):
        params = NetworkParams(d=1, K=1.0, M=3, q=77)
        as_fn = lambda X: np.asarray(forward_batch(params, X))
        assert sup_error_grid(params, as_fn, 257) == 0.0

    def test_constant_zero_vs_zero_weight(self):
        params = NetworkParams(d=1, K=1.0, M=2, q=0)
        f = make_function("constant", d=1, value=0.0, K=1.0)
        assert sup_error_grid(params, f, 101) == 1.0

    def test_2d_chunked(self):
        params = NetworkParams(d=2, K=1.0, M=1, q=3)
        f = make_function("constant", d=2, value=0.0, K=1.0)
        assert 0.0 <= sup_error_grid(params, f, 33) <= 1.0
