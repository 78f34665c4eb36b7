"""Scikit-learn style wrappers around the series features and the
recursive estimator.

Rows of X are consecutive samples of one input record (each row the
vector of per-channel areas for one sample interval), so order matters:
these are sequence models, not i.i.d. samples.  The transformer exposes
the running iterated-sum regressors as features; the regressor fits the
series coefficients online and predicts output trajectories for new
input records with the fitted coefficients.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .chen import chen_init, chen_step, regressor
from .learner import LearnerConfig, learn_step, learner_init
from .words import Alphabet, order_vector

__all__ = ["IteratedSumTransform", "ChenFliessRegressor"]


def _order_for(n_channels: int, degree: int):
    # one letter per sample channel; features are named x1..xK
    return order_vector(Alphabet(n_channels, drift=False), degree)


class IteratedSumTransform(TransformerMixin, BaseEstimator):
    """Running iterated-sum features of an input record.

    Row N of the output holds the truncated regressor after absorbing
    rows 0..N of X, starting from the identity state, so feeding the
    record's samples in order yields the same features the online
    learner sees.

    Parameters
    ----------
    degree : int, default=3
        Word-length truncation of the series.
    """

    def __init__(self, degree: int = 3):
        self.degree = degree

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True)
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")
        self.n_features_in_ = X.shape[1]
        self.order_ = _order_for(X.shape[1], self.degree)
        return self

    def transform(self, X):
        check_is_fitted(self, "order_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} channels, expected {self.n_features_in_}"
            )
        state = chen_init(self.order_, np.zeros(self.n_features_in_))
        out = np.empty((X.shape[0], len(self.order_)))
        for i, row in enumerate(X):
            state = chen_step(state, row)
            out[i] = regressor(state)
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "order_")
        return np.asarray(self.order_.render(), dtype=object)


class ChenFliessRegressor(RegressorMixin, BaseEstimator):
    """Online least-squares fit of truncated series coefficients.

    fit consumes one (X, y) record sample by sample with the recursive
    update; partial_fit continues the same stream across calls.  predict
    rebuilds the features of a fresh record and applies the fitted
    coefficients.

    Parameters
    ----------
    degree : int, default=3
        Word-length truncation of the series.
    reset_period : int, default=0
        Samples between covariance resets; 0 disables resetting.
    p0_scale : float, default=1.0
        Initial covariance is p0_scale times the identity.
    """

    def __init__(self, degree: int = 3, reset_period: int = 0, p0_scale: float = 1.0):
        self.degree = degree
        self.reset_period = reset_period
        self.p0_scale = p0_scale

    def _start(self, n_channels: int) -> None:
        self.n_features_in_ = n_channels
        self.order_ = _order_for(n_channels, self.degree)
        l = len(self.order_)
        config = LearnerConfig(
            P0=self.p0_scale * np.eye(l), reset_period=self.reset_period
        )
        self._learner = learner_init(config, self.order_)
        self._chen = chen_init(self.order_, np.zeros(n_channels))
        self.n_samples_seen_ = 0

    def _consume(self, X, y):
        innovations = np.empty(X.shape[0])
        for i, (row, target) in enumerate(zip(X, y)):
            self._chen = chen_step(self._chen, row)
            self._learner, _, inn = learn_step(self._learner, self._chen, target)
            innovations[i] = inn
        self.n_samples_seen_ += X.shape[0]
        self.coef_ = self._learner.theta.copy()
        self.innovation_trace_ = innovations
        return self

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if self.degree < 0:
            raise ValueError(f"degree must be >= 0, got {self.degree}")
        if self.p0_scale <= 0:
            raise ValueError(f"p0_scale must be positive, got {self.p0_scale}")
        self._start(X.shape[1])
        return self._consume(X, y)

    def partial_fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if not hasattr(self, "_learner"):
            self._start(X.shape[1])
        elif X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} channels, expected {self.n_features_in_}"
            )
        return self._consume(X, y)

    def predict(self, X):
        check_is_fitted(self, "coef_")
        features = IteratedSumTransform(degree=self.degree).fit(
            np.zeros((1, self.n_features_in_))
        ).transform(check_array(X))
        return features @ self.coef_

    @property
    def n_terms_(self) -> int:
        check_is_fitted(self, "coef_")
        return len(self.coef_)
