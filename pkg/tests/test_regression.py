import math
from fractions import Fraction

import numpy as np
import pytest

from kronnet import (
    Dataset,
    ERMConfig,
    HolderSpec,
    NetworkParams,
    cell_statistics,
    covering_log2,
    empirical_risk,
    erm_fit,
    forward_batch,
    generate_data,
    grid_index,
    make_function,
    prediction_error_mc,
    rate_study,
    read_dataset_csv,
    risk_bound,
    schedule,
    value_table,
    write_dataset_csv,
)
from kronnet.regression import _canonical_key


def zero_fn(d=1):
    return make_function("constant", d=d, value=0.0, K=1.0)


def naive_risk(data: Dataset, params: NetworkParams) -> float:
    z = np.asarray(forward_batch(params, data.X))
    return float(np.sum((data.y - z) ** 2))


class TestGenerateData:
    def test_empty(self):
        data = generate_data(zero_fn(), 0, seed=1)
        assert data.n == 0 and data.X.shape == (0, 1)

    def test_deterministic(self):
        a = generate_data(zero_fn(2), 50, seed=123)
        b = generate_data(zero_fn(2), 50, seed=123)
        assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)

    def test_moments(self):
        n = 100_000
        data = generate_data(zero_fn(), n, seed=7)
        assert abs(float(np.mean(data.y))) <= 4.0 / math.sqrt(n)
        assert 0.97 <= float(np.var(data.y)) <= 1.03
        assert 0.0 <= data.X.min() and data.X.max() <= 1.0


class TestCellStatistics:
    def test_single_sample(self):
        data = Dataset(X=np.array([[0.3]]), y=np.array([2.5]))
        stats = cell_statistics(data, 4)
        cell = grid_index((0.3,), 4) - 1
        assert stats.counts[cell] == 1
        assert stats.sums[cell] == 2.5
        assert stats.sumsq[cell] == 6.25
        assert stats.counts.sum() == 1

    def test_all_in_one_cell(self):
        X = np.full((10, 1), 0.05)
        data = Dataset(X=X, y=np.arange(10.0))
        stats = cell_statistics(data, 3)
        assert stats.counts[0] == 10
        assert (stats.counts[1:] == 0).all()

    def test_partition_of_counts(self, rng):
        data = Dataset(X=rng.random((500, 2)), y=rng.standard_normal(500))
        stats = cell_statistics(data, 3)
        assert stats.counts.sum() == 500


class TestEmpiricalRisk:
    def test_constant_fit_is_zero(self):
        # q=0 gives the constant -K; data at exactly -K has zero risk
        data = Dataset(X=np.linspace(0, 1, 7).reshape(-1, 1), y=np.full(7, -1.0))
        stats = cell_statistics(data, 2)
        assert empirical_risk(0, stats, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_single_sample(self, rng):
        x, y = 0.37, 1.25
        data = Dataset(X=np.array([[x]]), y=np.array([y]))
        stats = cell_statistics(data, 3)
        params = NetworkParams(d=1, K=1.0, M=3, q=17)
        expected = (y - forward_batch(params, [(x,)])[0]) ** 2
        assert empirical_risk(17, stats, 1.0) == pytest.approx(expected, rel=1e-12)

    def test_matches_naive_sum(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 2000))
            d = int(rng.integers(1, 3))
            M = int(rng.integers(1, 5))
            q = int(rng.integers(-(10**6), 10**6))
            data = Dataset(X=rng.random((n, d)), y=rng.standard_normal(n) * 2.0)
            stats = cell_statistics(data, M)
            got = empirical_risk(q, stats, 1.0)
            want = naive_risk(data, NetworkParams(d=d, K=1.0, M=M, q=q))
            assert abs(got - want) <= 1e-10 * max(1.0, abs(want))


def brute_force_erm(data, K, M, cap):
    # independent oracle: canonical-order scan with the certified evaluator
    stats = cell_statistics(data, M)
    best = None
    for k in range(cap + 1):
        for q in (k,) if k == 0 else (k, -k):
            key = (empirical_risk(q, stats, K), *_canonical_key(q))
            if best is None or key < best[0]:
                best = (key, q)
    return best[1], best[0][0]


class TestErmFit:
    def test_noiseless_recovery(self, rng):
        truth = NetworkParams(d=1, K=1.0, M=2, q=37)
        X = rng.random((200, 1))
        data = Dataset(X=X, y=np.asarray(forward_batch(truth, X)))
        q_hat, risk = erm_fit(data, 1.0, ERMConfig(M=2, q_cap=100))
        stats = cell_statistics(data, 2)
        assert abs(risk) <= 1e-9
        assert risk <= empirical_risk(37, stats, 1.0) + 1e-12

    def test_matches_brute_force(self, rng):
        for _ in range(5):
            n = int(rng.integers(2, 60))
            data = Dataset(X=rng.random((n, 1)), y=rng.standard_normal(n))
            q_hat, risk = erm_fit(data, 1.0, ERMConfig(M=2, q_cap=400))
            q_brute, risk_brute = brute_force_erm(data, 1.0, 2, 400)
            assert (q_hat, risk) == (q_brute, risk_brute)

    def test_single_sample(self, rng):
        data = Dataset(X=np.array([[0.9]]), y=np.array([0.31]))
        q_hat, risk = erm_fit(data, 1.0, ERMConfig(M=1, q_cap=50))
        q_brute, risk_brute = brute_force_erm(data, 1.0, 1, 50)
        assert (q_hat, risk) == (q_brute, risk_brute)

    def test_dominates_scanned_candidates(self, rng):
        data = Dataset(X=rng.random((150, 1)), y=rng.standard_normal(150))
        stats = cell_statistics(data, 3)
        q_hat, risk = erm_fit(data, 1.0, ERMConfig(M=3, q_cap=5000))
        assert risk <= empirical_risk(0, stats, 1.0)
        for q in rng.integers(-5000, 5001, size=40):
            assert risk <= empirical_risk(int(q), stats, 1.0) + 1e-12

    def test_reproducible_and_worker_invariant(self, rng):
        data = Dataset(X=rng.random((300, 1)), y=rng.standard_normal(300))
        runs = {erm_fit(data, 1.0, ERMConfig(M=4, q_cap=40_000, workers=w)) for w in (1, 2, 3)}
        assert len(runs) == 1

    def test_random_strategy(self, rng):
        data = Dataset(X=rng.random((100, 1)), y=rng.standard_normal(100))
        cfg = ERMConfig(M=2, q_cap=10_000, strategy="random", seed=5, sample_budget=2000)
        assert erm_fit(data, 1.0, cfg) == erm_fit(data, 1.0, cfg)

    def test_rejects_empty(self):
        data = Dataset(X=np.zeros((0, 1)), y=np.zeros(0))
        with pytest.raises(ValueError):
            erm_fit(data, 1.0, ERMConfig(M=1, q_cap=10))


class TestSchedule:
    def test_cubic_case(self):
        plan = schedule(27, HolderSpec(beta=1.0, F=0.5, K=1.0), 1)
        assert plan.M == 3
        assert plan.n_cells == 4
        # ceil(5^11 * (8 * 27^(1/3))^4) evaluated exactly
        assert plan.weight_bound == 5**11 * 24**4 == 16_200_000_000_000
        assert plan.digits == 14

    def test_n_one(self):
        assert schedule(1, HolderSpec(beta=1.0, F=0.5, K=1.0), 1).M == 1
        assert schedule(1, HolderSpec(beta=1.0, F=1.0, K=1.0), 1).M == 2

    def test_monotone_in_n(self):
        spec = HolderSpec(beta=1.0, F=0.5, K=1.0)
        sizes = [schedule(n, spec, 1).M for n in (8, 27, 64, 125)]
        assert sizes == sorted(sizes) == [2, 3, 4, 5]


class TestPredictionError:
    def test_exact_reproduction(self):
        params = NetworkParams(d=1, K=1.0, M=3, q=99)
        table = value_table(params)

        def as_fn(X):
            from kronnet import grid_index_batch

            return table[grid_index_batch(X, 3) - 1]

        assert prediction_error_mc(params, as_fn, 5000, seed=2) == 0.0

    def test_constant_gap(self):
        params = NetworkParams(d=1, K=1.0, M=2, q=0)
        assert prediction_error_mc(params, zero_fn(), 1000, seed=0) == 1.0
        assert prediction_error_mc(params, zero_fn(), 1, seed=0, method="quadrature") == pytest.approx(1.0)

    def test_mc_agrees_with_quadrature(self, rng):
        f0 = make_function("cosine", d=1, amplitude=0.5, frequency=1.0, K=1.0)
        for q in (37, -1234):
            params = NetworkParams(d=1, K=1.0, M=3, q=q)
            quad = prediction_error_mc(params, f0, 1, seed=0, method="quadrature")
            draws = np.random.default_rng(99).random((20_000, 1))
            table = value_table(params)
            from kronnet import grid_index_batch

            diffs = (table[grid_index_batch(draws, 3) - 1] - np.asarray(f0(draws))) ** 2
            se = float(np.std(diffs, ddof=1) / math.sqrt(len(diffs)))
            mc = prediction_error_mc(params, f0, 20_000, seed=99)
            assert abs(mc - quad) <= 3 * se


class TestRiskBound:
    def test_log_term(self):
        assert covering_log2(34992) == pytest.approx(16.095, abs=0.01)

    def test_closed_form_exact(self):
        delta, n, Q, a, K = Fraction(1, 27), 27, 34992, Fraction(1, 9), Fraction(1)
        log_term = Fraction(covering_log2(Q))
        expected = float(4 * (a + K**2 * (18 * log_term + 72) / n + 32 * delta * K))
        assert risk_bound(delta, n, Q, a, K) == expected

    def test_large_n_limit(self):
        # with zero approximation error and delta=1 only the 128K term survives
        value = risk_bound(1, 10**12, 34992, 0, 1.0)
        assert value == pytest.approx(128.0, abs=1e-6)

    def test_finite_for_schedule(self):
        plan = schedule(27, HolderSpec(beta=1.0, F=0.5, K=1.0), 1)
        value = risk_bound(Fraction(1, 27), 27, plan.weight_bound, 27 ** (-2 / 3), 1.0)
        assert math.isfinite(value) and value > 0


class TestRateStudy:
    def test_single_n_has_no_slope(self):
        f0 = zero_fn()
        report = rate_study([16], f0, seeds=[0, 1], q_caps=500, mc_size=2000)
        assert report.fitted_slope is None
        assert len(report.rows) == 1

    def test_small_study_shape(self):
        f0 = make_function("cosine", d=1, amplitude=0.5, frequency=1.0, K=1.0, F=0.5)
        report = rate_study([16, 64], f0, seeds=[0, 1, 2], q_caps=2000, mc_size=4000)
        assert [row.n for row in report.rows] == [16, 64]
        assert all(row.mean_error > 0 for row in report.rows)
        assert all(len(row.weights) == 3 for row in report.rows)
        assert report.theoretical_exponent == pytest.approx(-2 / 3)
        assert isinstance(report.fitted_slope, float)
        assert all(math.isfinite(row.bound) and row.bound > 0 for row in report.rows)

    def test_deterministic(self):
        f0 = zero_fn()
        a = rate_study([16, 32], f0, seeds=[0, 1], q_caps=300, mc_size=1000)
        b = rate_study([16, 32], f0, seeds=[0, 1], q_caps=300, mc_size=1000)
        assert a.to_dict() == b.to_dict()


class TestDatasetCsv:
    def test_roundtrip(self, tmp_path, rng):
        data = generate_data(zero_fn(2), 40, seed=5)
        path = tmp_path / "data.csv"
        write_dataset_csv(path, data)
        back = read_dataset_csv(path)
        assert np.array_equal(back.X, data.X)
        assert np.array_equal(back.y, data.y)

    def test_malformed_row_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,y\n0.5,1.0\n0.25,oops\n")
        with pytest.raises(ValueError, match="line 3"):
            read_dataset_csv(path)

    def test_wrong_field_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,y\n0.5\n")
        with pytest.raises(ValueError, match="line 2"):
            read_dataset_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_dataset_csv(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "head.csv"
        path.write_text("a,b\n0.5,1.0\n")
        with pytest.raises(ValueError, match="line 1"):
            read_dataset_csv(path)
