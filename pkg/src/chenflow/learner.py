"""Recursive least squares over iterated-sum regressors.

One learning unit identifies the coefficients of one output (or error)
channel.  Given the regressor phi(N) and a measured sample y(N), the
update is the standard covariance form

    e(N)     = y(N) - phi(N)' theta(N-1)
    g(N-1)   = P(N-2) phi(N) / (1 + phi(N)' P(N-2) phi(N))
    theta(N) = theta(N-1) + g(N-1) e(N)
    P(N-1)   = P(N-2) - P(N-2) phi phi' P(N-2) / (1 + phi' P(N-2) phi)

with theta(0) and a positive definite P(-1) = P0 given.  Without resets
the estimate after any number of steps is the exact minimizer of

    sum_k (y(k) - phi(k)' theta)^2 + (theta - theta0)' P0^{-1} (theta - theta0),

which batch_least_squares solves densely as an independent check.
Periodic covariance resetting restores P to P0 every reset_period
updates to keep adaptation gain alive during regime changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chen import ChenState, regressor
from .words import OrderVector

__all__ = [
    "LearnerConfig",
    "LearnerState",
    "learner_init",
    "rls_update",
    "learn_step",
    "batch_least_squares",
]

DEFAULT_RESET_PERIOD = 25


@dataclass(frozen=True)
class LearnerConfig:
    """Initial estimate, initial covariance, and reset cadence.

    theta0 defaults to zeros and P0 to the identity; reset_period = 0
    disables covariance resetting.
    """

    theta0: np.ndarray | None = None
    P0: np.ndarray | None = None
    reset_period: int = DEFAULT_RESET_PERIOD

    def __post_init__(self) -> None:
        if self.reset_period < 0:
            raise ValueError(f"reset_period must be >= 0, got {self.reset_period}")

    def resolve(self, l: int) -> tuple[np.ndarray, np.ndarray]:
        """Materialize (theta0, P0) at dimension l, validating both."""
        theta0 = np.zeros(l) if self.theta0 is None else np.asarray(self.theta0, float)
        P0 = np.eye(l) if self.P0 is None else np.asarray(self.P0, float)
        if theta0.shape != (l,):
            raise ValueError(f"theta0 has shape {theta0.shape}, expected ({l},)")
        if P0.shape != (l, l):
            raise ValueError(f"P0 has shape {P0.shape}, expected ({l}, {l})")
        if np.max(np.abs(P0 - P0.T)) > 1e-10:
            raise ValueError("P0 must be symmetric")
        if np.min(np.linalg.eigvalsh(P0)) <= 0.0:
            raise ValueError("P0 must be positive definite")
        return theta0, P0


@dataclass(frozen=True)
class LearnerState:
    """Estimate theta(N), covariance P(N-1), and reset bookkeeping."""

    theta: np.ndarray
    P: np.ndarray
    steps_since_reset: int
    n: int
    config: LearnerConfig = field(repr=False, default_factory=LearnerConfig)


def learner_init(config: LearnerConfig, order: OrderVector | int) -> LearnerState:
    """Fresh state at sample index 0 for the given order vector (or dimension)."""
    l = order if isinstance(order, int) else len(order)
    theta0, P0 = config.resolve(l)
    return LearnerState(theta0.copy(), P0.copy(), 0, 0, config)


def rls_update(state: LearnerState, phi, y: float) -> LearnerState:
    """One least-squares update; resets the covariance after the update
    when the configured period is reached."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != state.theta.shape:
        raise ValueError(f"regressor has shape {phi.shape}, expected {state.theta.shape}")
    if not (np.all(np.isfinite(phi)) and np.isfinite(y)):
        raise ValueError("non-finite regressor or measurement")

    P = state.P
    Pphi = P @ phi
    denom = 1.0 + float(phi @ Pphi)
    innovation = float(y) - float(phi @ state.theta)
    theta = state.theta + (Pphi / denom) * innovation
    P = P - np.outer(Pphi, Pphi) / denom
    P = 0.5 * (P + P.T)  # guard against symmetry drift

    steps = state.steps_since_reset + 1
    period = state.config.reset_period
    if period > 0 and steps >= period:
        _, P0 = state.config.resolve(len(theta))
        P = P0.copy()
        steps = 0
    return LearnerState(theta, P, steps, state.n + 1, state.config)


def learn_step(state: LearnerState, chen: ChenState, y: float):
    """Predict from the current regressor, then update.

    Returns (new_state, predicted, innovation) where predicted is the
    one-step estimate phi(N)' theta(N-1) and innovation is y minus it.
    """
    phi = regressor(chen)
    predicted = float(phi @ state.theta)
    new_state = rls_update(state, phi, y)
    return new_state, predicted, float(y) - predicted


def batch_least_squares(phis, ys, theta0=None, P0=None) -> np.ndarray:
    """Dense normal-equations minimizer of the regularized index.

    Solves (P0^{-1} + sum phi phi') theta = P0^{-1} theta0 + sum phi y.
    Independent of the recursive path, so it doubles as its oracle.
    """
    Phi = np.asarray(phis, dtype=float)
    y = np.asarray(ys, dtype=float)
    if Phi.ndim != 2 or Phi.shape[0] != y.shape[0]:
        raise ValueError("phis must be (N, l) with one row per measurement")
    l = Phi.shape[1]
    theta0 = np.zeros(l) if theta0 is None else np.asarray(theta0, float)
    P0 = np.eye(l) if P0 is None else np.asarray(P0, float)
    P0_inv = np.linalg.inv(P0)
    A = P0_inv + Phi.T @ Phi
    b = P0_inv @ theta0 + Phi.T @ y
    return np.linalg.solve(A, b)
