"""Continuous-time truth models and the input discretizer.

Plants are control affine: zdot = g0(z) + sum_i g_i(z) u_i with output
functions h_j.  Integration is fixed-step classical Runge-Kutta with a
configurable number of substeps per sample interval, so runs are
deterministic and reproducible across platforms.  The discretizer turns
a continuous input into per-sample areas u_hat_i(N) = integral of u_i
over ((N-1) Delta, N Delta], with the drift channel pinned to Delta.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DiscretizationConfig",
    "LotkaVolterraParams",
    "PlantModel",
    "Trajectory",
    "SimulationBlowUp",
    "rk4_step",
    "integrate",
    "discretize_input",
    "lv_model",
    "lv_conserved",
    "exp_model",
]

DEFAULT_SUBSTEPS = 10


class SimulationBlowUp(RuntimeError):
    """Raised when integration produces a non-finite state."""

    def __init__(self, sample_index: int):
        super().__init__(f"state became non-finite at sample {sample_index}")
        self.sample_index = sample_index


@dataclass(frozen=True)
class DiscretizationConfig:
    """Horizon T split into L samples of width Delta = T/L, with series
    truncation degree J and the orbit tolerance used by references."""

    T: float = 6.0
    L: int = 100
    J: int = 3
    eps: float = 0.05

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.J < 0:
            raise ValueError(f"J must be >= 0, got {self.J}")

    @property
    def delta(self) -> float:
        return self.T / self.L

    @property
    def times(self) -> np.ndarray:
        """Sample instants 0, Delta, ..., T (length L+1)."""
        return np.arange(self.L + 1) * self.delta


@dataclass(frozen=True)
class LotkaVolterraParams:
    """Predator-prey coefficients; the growth/decay rates beta become
    inputs in the controlled configurations."""

    alpha12: float = 1.0
    alpha21: float = 1.0
    beta1: float = 1.0
    beta2: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha12 <= 0 or self.alpha21 <= 0:
            raise ValueError("interaction coefficients must be positive")

    def perturbed(self, **deltas: float) -> "LotkaVolterraParams":
        """Copy with relative perturbations in percent, e.g. alpha21=20."""
        values = {
            name: getattr(self, name) * (1.0 + deltas.get(name, 0.0) / 100.0)
            for name in ("alpha12", "alpha21", "beta1", "beta2")
        }
        return LotkaVolterraParams(**values)

    @property
    def center(self) -> tuple[float, float]:
        """The interior equilibrium under constant inputs (beta1, beta2)."""
        return (self.beta2 / self.alpha21, self.beta1 / self.alpha12)


@dataclass(frozen=True)
class PlantModel:
    """Control affine system zdot = g0(z) + sum g_i(z) u_i, y_j = h_j(z).

    The field callables must broadcast over a leading batch axis: given
    z of shape (..., n) they return (..., n), and each output map returns
    (...,).  z0 is the initial state.
    """

    state_dim: int
    input_dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    controls: tuple[Callable[[np.ndarray], np.ndarray], ...]
    outputs: tuple[Callable[[np.ndarray], np.ndarray], ...]
    z0: np.ndarray

    def __post_init__(self) -> None:
        if len(self.controls) != self.input_dim:
            raise ValueError("one control field per input channel required")
        object.__setattr__(self, "z0", np.asarray(self.z0, dtype=float))
        if self.z0.shape != (self.state_dim,):
            raise ValueError(f"z0 has shape {self.z0.shape}, expected ({self.state_dim},)")

    @property
    def output_dim(self) -> int:
        return len(self.outputs)

    def rhs(self, z: np.ndarray, u: np.ndarray) -> np.ndarray:
        """State derivative for state batch z (..., n) and inputs u (..., m)."""
        dz = self.drift(z)
        for i, g in enumerate(self.controls):
            dz += g(z) * u[..., i: i + 1]
        return dz

    def output(self, z: np.ndarray) -> np.ndarray:
        """Stack of output maps, shape (..., output_dim)."""
        return np.stack([h(z) for h in self.outputs], axis=-1)


def rk4_step(
    model: PlantModel,
    z: np.ndarray,
    u: np.ndarray,
    dt: float,
    substeps: int = DEFAULT_SUBSTEPS,
) -> np.ndarray:
    """Advance by dt holding u constant, with classical RK4 substeps.

    Both z (..., n) and u (..., m) may carry a batch axis; candidate
    inputs are integrated in parallel this way.
    """
    h = dt / substeps
    for _ in range(substeps):
        k1 = model.rhs(z, u)
        k2 = model.rhs(z + 0.5 * h * k1, u)
        k3 = model.rhs(z + 0.5 * h * k2, u)
        k4 = model.rhs(z + h * k3, u)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return z


def _rk4_step_timed(model, z, u_of_t, t0, dt, substeps):
    """RK4 over [t0, t0+dt] with time-varying input evaluated at substep nodes."""
    h = dt / substeps
    t = t0
    for _ in range(substeps):
        u_a = u_of_t(t)
        u_m = u_of_t(t + 0.5 * h)
        u_b = u_of_t(t + h)
        k1 = model.rhs(z, u_a)
        k2 = model.rhs(z + 0.5 * h * k1, u_m)
        k3 = model.rhs(z + 0.5 * h * k2, u_m)
        k4 = model.rhs(z + h * k3, u_b)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
    return z


@dataclass(frozen=True)
class Trajectory:
    """States and outputs at the sample instants 0..L."""

    t: np.ndarray
    states: np.ndarray
    outputs: np.ndarray


def _as_input_fn(u, input_dim: int):
    def wrap(t):
        val = np.atleast_1d(np.asarray(u(t), dtype=float))
        if val.shape != (input_dim,):
            raise ValueError(f"input signal returned shape {val.shape}, expected ({input_dim},)")
        return val

    return wrap


def integrate(
    model: PlantModel,
    u,
    disc: DiscretizationConfig,
    substeps: int = DEFAULT_SUBSTEPS,
) -> Trajectory:
    """Simulate over [0, T] and record z and y at every sample instant.

    u may be a callable t -> inputs, or an (L, m) array of values held
    constant over each sample interval (zero-order hold).  A model with
    no inputs accepts u = None.
    """
    L, dt = disc.L, disc.delta
    if u is None:
        if model.input_dim != 0:
            raise ValueError("model has inputs; an input signal is required")
        u_held, u_fn = np.zeros((L, 0)), None
    elif callable(u):
        u_held, u_fn = None, _as_input_fn(u, model.input_dim)
    else:
        u_held = np.asarray(u, dtype=float)
        if u_held.shape != (L, model.input_dim):
            raise ValueError(f"held input has shape {u_held.shape}, expected ({L}, {model.input_dim})")
        u_fn = None

    z = model.z0.copy()
    states = np.empty((L + 1, model.state_dim))
    states[0] = z
    for N in range(1, L + 1):
        if u_fn is not None:
            z = _rk4_step_timed(model, z, u_fn, (N - 1) * dt, dt, substeps)
        else:
            z = rk4_step(model, z, u_held[N - 1], dt, substeps)
        if not np.all(np.isfinite(z)):
            raise SimulationBlowUp(N)
        states[N] = z
    outputs = model.output(states)
    return Trajectory(disc.times, states, outputs)


def discretize_input(
    u,
    disc: DiscretizationConfig,
    input_dim: int = 1,
    substeps: int = DEFAULT_SUBSTEPS,
    drift: bool = True,
) -> np.ndarray:
    """Per-sample input areas, shape (L, input_dim + 1) with a leading
    Delta column when drift is True.

    Callable inputs are integrated by composite Simpson quadrature on
    2*substeps panels per sample; held (L, m) arrays integrate exactly
    to value * Delta.
    """
    L, dt = disc.L, disc.delta
    if callable(u):
        u_fn = _as_input_fn(u, input_dim)
        nodes = 2 * substeps
        weights = np.ones(nodes + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        weights *= dt / (3.0 * nodes)
        areas = np.empty((L, input_dim))
        for N in range(1, L + 1):
            ts = (N - 1) * dt + np.arange(nodes + 1) * (dt / nodes)
            vals = np.stack([u_fn(t) for t in ts])
            areas[N - 1] = weights @ vals
    else:
        held = np.asarray(u, dtype=float)
        if held.shape != (L, input_dim):
            raise ValueError(f"held input has shape {held.shape}, expected ({L}, {input_dim})")
        areas = held * dt
    if not drift:
        return areas
    out = np.empty((L, input_dim + 1))
    out[:, 0] = dt
    out[:, 1:] = areas
    return out


def lv_model(
    params: LotkaVolterraParams,
    controlled: tuple[bool, bool] = (True, True),
    z0: Sequence[float] = (0.4, 0.6),
) -> PlantModel:
    """Predator-prey system with the selected growth rates actuated.

        z1dot =  u1 z1 - alpha12 z1 z2      (u1 = beta1 when not controlled)
        z2dot = -u2 z2 + alpha21 z1 z2      (u2 = beta2 when not controlled)

    Outputs are the two populations.  Inputs enter in the order
    (u1, u2) restricted to the controlled flags.
    """
    a12, a21 = params.alpha12, params.alpha21
    b1, b2 = params.beta1, params.beta2
    c1, c2 = controlled

    def drift(z):
        z1, z2 = z[..., 0], z[..., 1]
        cross = z1 * z2
        out = np.empty_like(z)
        out[..., 0] = b1 * z1 - a12 * cross if not c1 else -a12 * cross
        out[..., 1] = a21 * cross - b2 * z2 if not c2 else a21 * cross
        return out

    def prey_growth(z):
        out = np.zeros_like(z)
        out[..., 0] = z[..., 0]
        return out

    def predator_decay(z):
        out = np.zeros_like(z)
        out[..., 1] = -z[..., 1]
        return out

    controls = []
    if c1:
        controls.append(prey_growth)
    if c2:
        controls.append(predator_decay)

    return PlantModel(
        state_dim=2,
        input_dim=len(controls),
        drift=drift,
        controls=tuple(controls),
        outputs=(lambda z: z[..., 0], lambda z: z[..., 1]),
        z0=np.asarray(z0, dtype=float),
    )


def lv_conserved(params: LotkaVolterraParams, z) -> np.ndarray:
    """First integral of the predator-prey flow under constant nominal inputs:

        V(z) = alpha21 z1 - beta2 ln z1 + alpha12 z2 - beta1 ln z2.

    Constant along orbits with u = (beta1, beta2); its level sets are the
    closed orbits, so it doubles as the orbit-transfer target measure.
    """
    z = np.asarray(z, dtype=float)
    z1, z2 = z[..., 0], z[..., 1]
    return (
        params.alpha21 * z1
        - params.beta2 * np.log(z1)
        + params.alpha12 * z2
        - params.beta1 * np.log(z2)
    )


def exp_model() -> PlantModel:
    """Scalar integrator with exponential read-out: zdot = u, y = exp(z)."""
    return PlantModel(
        state_dim=1,
        input_dim=1,
        drift=lambda z: np.zeros_like(z),
        controls=(lambda z: np.ones_like(z),),
        outputs=(lambda z: np.exp(z[..., 0]),),
        z0=np.zeros(1),
    )
