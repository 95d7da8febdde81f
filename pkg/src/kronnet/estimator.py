"""scikit-learn style front end for the single-integer-weight regressor."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .holder import HolderSpec
from .network import NetworkParams, grid_index_batch, value_table
from .regression import Dataset, ERMConfig, erm_fit, schedule


class KroneckerNetRegressor(RegressorMixin, BaseEstimator):
    """Piecewise-constant regressor on [0,1]^d with one integer weight.

    The hypothesis class is the family of networks indexed by a single
    integer q: a point is binned into one of (M+1)^d grid cells and mapped
    to 2K * frac(q * 2^(i/(N+1))) - K on cell i.  Fitting is empirical risk
    minimization by exhaustive (or seeded random) scan over |q| <= q_cap,
    with per-cell sufficient statistics making each candidate O(N).

    Parameters
    ----------
    K : float, default=1.0
        Output bound; predictions lie in [-K, K).
    M : int or None, default=None
        Grid resolution per axis.  None picks the sample-size schedule
        derived from (beta, F).
    beta, F : float
        Declared smoothness used only when M is None.
    q_cap : int, default=1_000_000
        Scan limit on |q|.
    strategy : {'exhaustive', 'random'}, default='exhaustive'
    sample_budget : int, default=100_000
        Draws for the random strategy.
    seed : int, default=0
        Seed for the random strategy.
    workers : int, default=1
        Scan parallelism; results are identical for any worker count.

    Attributes
    ----------
    q_ : int
        The fitted integer weight.
    risk_ : float
        Empirical squared-error risk of q_ on the training data.
    M_ : int
        Grid resolution actually used.
    network_ : NetworkParams
        Parameters of the fitted network.
    n_features_in_ : int
        Input dimension d.
    """

    def __init__(
        self,
        K: float = 1.0,
        M: int | None = None,
        beta: float = 1.0,
        F: float = 1.0,
        q_cap: int = 1_000_000,
        strategy: str = "exhaustive",
        sample_budget: int = 100_000,
        seed: int = 0,
        workers: int = 1,
    ):
        self.K = K
        self.M = M
        self.beta = beta
        self.F = F
        self.q_cap = q_cap
        self.strategy = strategy
        self.sample_budget = sample_budget
        self.seed = seed
        self.workers = workers

    def _validate_cube(self, X):
        if X.size and (X.min() < 0.0 or X.max() > 1.0):
            raise ValueError("X must lie in the unit cube [0, 1]^d")

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self._validate_cube(X)
        d = X.shape[1]
        if self.M is not None:
            M = int(self.M)
        else:
            M = schedule(len(y), HolderSpec(beta=self.beta, F=self.F, K=self.K), d).M
        data = Dataset(X=X, y=y)
        config = ERMConfig(
            M=M,
            q_cap=self.q_cap,
            strategy=self.strategy,
            seed=self.seed,
            sample_budget=self.sample_budget,
            workers=self.workers,
        )
        self.q_, self.risk_ = erm_fit(data, self.K, config)
        self.M_ = M
        self.network_ = NetworkParams(d=d, K=self.K, M=M, q=self.q_)
        self.n_features_in_ = d
        return self

    def predict(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        self._validate_cube(X)
        table = value_table(self.network_)
        return table[grid_index_batch(X, self.M_) - 1]
