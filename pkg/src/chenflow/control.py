"""One-step-ahead predictive control with online learning in the loop.

Each sample the controller picks the next input areas by minimizing the
weighted tracking cost

    cost(u) = y_e' W y_e,
    y_e = y_d(next) - [y_model(next | u) + Q(u)]

over the box |u_i| <= u_bound, where Q is each learning unit's one-step
prediction polynomial and y_model is the physical model integrated one
sample ahead under the same candidate (zero in model-free mode, where
the units learn the plant output directly instead of the model error).
Minimization is a deterministic pipeline: full grid sweep, coordinate
refinement by interval thirding, then a Nelder-Mead polish, with ties
broken toward the lexicographically smallest candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import itertools

import numpy as np
from scipy import optimize

from .chen import (
    ChenState,
    chen_init,
    chen_step,
    coefficient_monomials,
    prediction_weights,
    regressor,
)
from .learner import LearnerConfig, LearnerState, learn_step, learner_init
from .plant import (
    DiscretizationConfig,
    LotkaVolterraParams,
    PlantModel,
    SimulationBlowUp,
    integrate,
    lv_conserved,
    lv_model,
    rk4_step,
)
from .words import Alphabet, order_vector

__all__ = [
    "ControllerConfig",
    "ReferenceTrajectory",
    "LoopState",
    "RunReport",
    "RmsSummary",
    "minimize_box",
    "make_reference",
    "orbit_transfer_reference",
    "control_step",
    "closed_loop_run",
    "rms_report",
]


@dataclass(frozen=True)
class ControllerConfig:
    """Input box, tracking weight, and optimizer knobs.

    The controller picks held input levels from the box
    u_nominal +/- u_bound per channel.  For actuated plant parameters
    the nominal point is their unperturbed value, so u_bound reads as
    the allowed actuation excursion; the default nominal of zero gives
    the plain symmetric box.  W weighs the tracked output channels and
    must be symmetric positive semi-definite.
    """

    u_bound: float
    W: np.ndarray
    u_nominal: float | np.ndarray = 0.0
    grid_points: int = 21
    refine_rounds: int = 10
    multistart: int = 3
    nm_maxiter: int = 120

    def __post_init__(self) -> None:
        if self.u_bound <= 0:
            raise ValueError(f"u_bound must be positive, got {self.u_bound}")
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        object.__setattr__(self, "W", W)
        if W.shape[0] != W.shape[1]:
            raise ValueError("W must be square")
        if np.max(np.abs(W - W.T)) > 1e-12:
            raise ValueError("W must be symmetric")
        if np.min(np.linalg.eigvalsh(W)) < -1e-12:
            raise ValueError("W must be positive semi-definite")
        if self.grid_points < 2 or self.refine_rounds < 0 or self.multistart < 1:
            raise ValueError("invalid optimizer configuration")

    def center(self, input_dim: int) -> np.ndarray:
        nom = np.broadcast_to(np.asarray(self.u_nominal, dtype=float), (input_dim,))
        return nom.astype(float)


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Desired outputs at the sample instants Delta..T, plus the held
    input that generated them from the design model."""

    t: np.ndarray
    outputs: np.ndarray
    u_held: np.ndarray
    z0: np.ndarray
    provenance: str = ""

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.outputs)):
            raise ValueError("reference outputs must be finite")
        if self.outputs.shape[0] != self.t.shape[0]:
            raise ValueError("reference length mismatch")

    def __len__(self) -> int:
        return self.outputs.shape[0]


def make_reference(
    model: PlantModel,
    u_held,
    disc: DiscretizationConfig,
    u_bound: float | None = None,
    u_nominal: float | np.ndarray = 0.0,
    provenance: str = "",
) -> ReferenceTrajectory:
    """Desired trajectory from simulating the design model under u_held.

    u_held is an (L, m) array applied with zero-order hold, so the
    reference is attainable one sample at a time by construction.  When
    u_bound is given, every held level must stay inside the controller's
    box u_nominal +/- u_bound, otherwise the loop could never realize
    the reference.
    """
    u_held = np.asarray(u_held, dtype=float)
    if u_bound is not None and u_held.size:
        excursion = np.max(np.abs(u_held - np.asarray(u_nominal, dtype=float)))
        if excursion > u_bound + 1e-12:
            raise ValueError(
                f"reference input leaves the box by {excursion - u_bound:.6g} "
                f"(bound {u_bound:.6g})"
            )
    traj = integrate(model, u_held, disc)
    return ReferenceTrajectory(
        traj.t[1:], traj.outputs[1:], u_held, model.z0.copy(), provenance
    )


def _pump_direction(params: LotkaVolterraParams, z, controlled) -> np.ndarray:
    """Input offsets that monotonically raise the orbit level V at state z."""
    d1 = params.alpha21 * z[0] - params.beta2
    d2 = -(params.alpha12 * z[1] - params.beta1)
    full = np.array([d1, d2])
    return full[np.array(controlled, dtype=bool)]


def orbit_transfer_reference(
    params: LotkaVolterraParams,
    disc: DiscretizationConfig,
    controlled: tuple[bool, bool] = (True, True),
    z0=(0.4, 0.6),
    v_offset: float = 0.75,
    window: tuple[float, float] = (0.6, 4.2),
    u_bound: float | None = None,
) -> ReferenceTrajectory:
    """Reference that carries the predator-prey system between orbits.

    The growth-rate inputs are ramped smoothly away from their nominal
    values in the direction that pumps the conserved quantity V, with
    the ramp amplitude solved by bracketing root search so that the
    terminal state lands on the level set V(z0) + v_offset.  Outside the
    ramp window the inputs sit at nominal and the trajectory coasts on
    an orbit.
    """
    model = lv_model(params, controlled, z0)
    nominal = np.array([params.beta1, params.beta2])[np.array(controlled, dtype=bool)]
    t1, t2 = window
    if not (0.0 <= t1 < t2 <= disc.T):
        raise ValueError(f"ramp window {window} must sit inside [0, {disc.T}]")
    v_target = float(lv_conserved(params, np.asarray(z0, float))) + v_offset
    L, dt = disc.L, disc.delta

    def ramp(t: float) -> float:
        if t <= t1 or t >= t2:
            return 0.0
        return float(np.sin(np.pi * (t - t1) / (t2 - t1)) ** 2)

    def simulate(kappa: float):
        z = model.z0.copy()
        u_held = np.empty((L, model.input_dim))
        for N in range(1, L + 1):
            s = ramp((N - 0.5) * dt)
            u = nominal + kappa * s * _pump_direction(params, z, controlled)
            u_held[N - 1] = u
            z = rk4_step(model, z, u, dt)
        return float(lv_conserved(params, z)), u_held

    def overshoot(kappa: float) -> float:
        return simulate(kappa)[0] - v_target

    if v_offset == 0.0:
        kappa = 0.0
    else:
        hi = 0.5 if v_offset > 0 else -0.5
        for _ in range(12):
            if overshoot(hi) * np.sign(v_offset) > 0:
                break
            hi *= 2.0
        else:
            raise RuntimeError("could not bracket the orbit-transfer amplitude")
        lo, hi = (0.0, hi) if v_offset > 0 else (hi, 0.0)
        kappa = float(optimize.brentq(overshoot, lo, hi, xtol=1e-12))

    v_final, u_held = simulate(kappa)
    if abs(v_final - v_target) > disc.eps:
        raise RuntimeError(
            f"transfer misses the target level set by {abs(v_final - v_target):.3g}"
        )
    ref = make_reference(
        model,
        u_held,
        disc,
        u_bound=u_bound,
        u_nominal=nominal,
        provenance=f"orbit transfer v_offset={v_offset} window={window} kappa={kappa:.6g}",
    )
    return ref


def minimize_box(
    cost_batch,
    center: np.ndarray,
    bound: float,
    cfg: ControllerConfig,
) -> tuple[np.ndarray, float]:
    """Deterministic global-then-local search over the box center +/- bound.

    cost_batch maps an (n, ndim) array of candidates to n costs; costs
    that come back non-finite are treated as +inf.  The returned point
    is the best candidate evaluated anywhere in the pipeline, so it is
    never worse than the best grid point; ties go to the
    lexicographically smallest candidate.
    """
    center = np.asarray(center, dtype=float)
    ndim = center.shape[0]
    lo, hi = center - bound, center + bound

    def costs_of(points: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            c = np.asarray(cost_batch(points), dtype=float)
        return np.where(np.isfinite(c), c, np.inf)

    steps = [np.linspace(l, h, cfg.grid_points) for l, h in zip(lo, hi)]
    grid = np.array(list(itertools.product(*steps)))
    grid_costs = costs_of(grid)

    best_u, best_c = None, np.inf

    def consider(points: np.ndarray, costs: np.ndarray) -> None:
        nonlocal best_u, best_c
        for u, c in zip(points, costs):
            if c < best_c or (c == best_c and tuple(u) < tuple(best_u)):
                best_u, best_c = u.copy(), float(c)

    consider(grid, grid_costs)
    grid_best = best_c

    start_idx = np.argsort(grid_costs, kind="stable")[: cfg.multistart]
    spacing = 2.0 * bound / (cfg.grid_points - 1)
    offsets = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=ndim)))

    h = spacing
    starts = grid[start_idx].copy()
    for _ in range(cfg.refine_rounds):
        pts = np.clip(starts[:, None, :] + h * offsets[None, :, :], lo, hi)
        pts = pts.reshape(-1, ndim)
        costs = costs_of(pts)
        consider(pts, costs)
        per_start = costs.reshape(len(starts), -1)
        starts = pts.reshape(len(starts), -1, ndim)[
            np.arange(len(starts)), np.argmin(per_start, axis=1)
        ]
        h /= 3.0

    simplex = np.vstack(
        [best_u] + [best_u + max(h, 1e-7 * bound) * e for e in np.eye(ndim)]
    )
    result = optimize.minimize(
        lambda x: float(costs_of(np.clip(x, lo, hi)[None, :])[0]),
        best_u,
        method="Nelder-Mead",
        bounds=list(zip(lo, hi)),
        options={
            "initial_simplex": np.clip(simplex, lo, hi),
            "xatol": 1e-10 * max(bound, 1.0),
            "fatol": 1e-300,
            "maxiter": cfg.nm_maxiter,
        },
    )
    u_polished = np.clip(result.x, lo, hi)
    consider(u_polished[None, :], costs_of(u_polished[None, :]))

    assert best_c <= grid_best, "optimizer returned worse than the grid sweep"
    assert np.all(best_u >= lo) and np.all(best_u <= hi)
    return best_u, best_c


@dataclass
class LoopState:
    """Mutable closed-loop state: plant and model states plus one
    (series, estimator) pair per tracked output channel.

    With model feedback the model state is re-anchored at the plant's
    measured state before every one-step prediction, so the learning
    units see the one-step modeling residual; without it the model runs
    open loop in parallel and the units must absorb the accumulated
    divergence."""

    z: np.ndarray
    z_model: np.ndarray | None
    chens: list[ChenState]
    learners: list[LearnerState]
    N: int
    mode: str  # "model" or "model_free"


def _candidate_cost_fn(loop, y_d_next, cfg, disc, model, tracked, substeps):
    """Batch cost over candidate held input levels for the coming sample."""
    order = loop.chens[0].order
    dt = disc.delta
    weights = np.column_stack(
        [prediction_weights(ln.theta, ch) for ln, ch in zip(loop.learners, loop.chens)]
    )
    W = cfg.W
    y_target = y_d_next[list(tracked)]

    def cost_batch(U: np.ndarray) -> np.ndarray:
        n = U.shape[0]
        samples = np.empty((n, U.shape[1] + 1))
        samples[:, 0] = dt
        samples[:, 1:] = U * dt
        Q = coefficient_monomials(samples, order) @ weights
        if loop.mode == "model":
            z0 = np.broadcast_to(loop.z_model, (n, loop.z_model.shape[0]))
            z_next = rk4_step(model, z0, U, dt, substeps)
            y_hat = model.output(z_next)[:, list(tracked)]
        else:
            y_hat = 0.0
        E = y_target[None, :] - (y_hat + Q)
        return np.einsum("ni,ij,nj->n", E, W, E)

    return cost_batch


def control_step(
    loop: LoopState,
    y_d_next: np.ndarray,
    cfg: ControllerConfig,
    disc: DiscretizationConfig,
    model: PlantModel | None = None,
    tracked: tuple[int, ...] = (0, 1),
    substeps: int = 10,
) -> np.ndarray:
    """Choose the next sample's input.

    Returns the full sample area vector (drift area Delta followed by
    the chosen held levels times Delta); each held level stays within
    the configured box.
    """
    cost_batch = _candidate_cost_fn(loop, y_d_next, cfg, disc, model, tracked, substeps)
    ndim = loop.chens[0].order.alphabet.m
    u_free, _ = minimize_box(cost_batch, cfg.center(ndim), cfg.u_bound, cfg)
    return np.concatenate([[disc.delta], u_free * disc.delta])


@dataclass(frozen=True)
class RmsSummary:
    """Normalized per-channel RMS tracking errors and the largest
    applied input area."""

    dy: np.ndarray
    u_inf: float


@dataclass
class RunReport:
    """Everything a closed-loop run produced, sampled at Delta..T."""

    t: np.ndarray
    y_desired: np.ndarray
    y: np.ndarray
    y_model: np.ndarray | None
    errors: np.ndarray
    u_samples: np.ndarray
    u_held: np.ndarray
    cost: np.ndarray
    predictions: np.ndarray
    innovations: np.ndarray
    theta_norms: np.ndarray
    states: np.ndarray
    tracked: tuple[int, ...]
    learning: bool
    blow_up_at: int | None = None
    summary: RmsSummary = field(init=False)

    def __post_init__(self) -> None:
        self.summary = rms_report(self)

    @property
    def completed(self) -> int:
        return self.y.shape[0]


def rms_report(run: RunReport) -> RmsSummary:
    """Per-sample RMS error normalized by the desired sample value,
    plus the largest applied held input level."""
    yd = run.y_desired
    if yd.size and np.any(yd == 0.0):
        raise ValueError("desired trajectory contains a zero sample")
    if run.y.size == 0:
        return RmsSummary(np.full(yd.shape[1], np.inf), np.inf)
    rel = (run.y - yd) / yd
    dy = np.sqrt(np.mean(rel**2, axis=0))
    u_inf = float(np.max(np.abs(run.u_held))) if run.u_held.size else 0.0
    return RmsSummary(dy, u_inf)


def closed_loop_run(
    plant: PlantModel,
    model: PlantModel | None,
    reference: ReferenceTrajectory,
    cfg: ControllerConfig,
    disc: DiscretizationConfig,
    learner_config: LearnerConfig | None = None,
    tracked: tuple[int, ...] | None = None,
    learning: bool = True,
    model_feedback: bool = True,
    substeps: int = 10,
) -> RunReport:
    """Run the full learning control loop over the reference horizon.

    Per sample: pick the input by the predictive controller, apply it to
    the plant (and the model when present) with zero-order hold, form
    the per-channel learning target (model error, or the raw output in
    model-free mode), advance each unit's series with the applied
    sample, and update its estimate.  A plant blow-up truncates the run
    and is recorded rather than raised.

    model_feedback anchors the model at the plant's measured state each
    sample (the outputs of the stock plants determine the state); set it
    False to run the model open loop in parallel from its own initial
    state.
    """
    if len(reference) != disc.L:
        raise ValueError("reference length must match the sample count")
    if model is not None and (
        model.state_dim != plant.state_dim or model.input_dim != plant.input_dim
    ):
        raise ValueError("plant and model dimensions differ")
    if tracked is None:
        tracked = tuple(range(plant.output_dim))
    W = np.atleast_2d(cfg.W)
    if W.shape[0] != len(tracked):
        raise ValueError(f"W is {W.shape} but {len(tracked)} channels are tracked")
    learner_config = learner_config or LearnerConfig()

    alphabet = Alphabet(plant.input_dim)
    order = order_vector(alphabet, disc.J)
    mode = "model" if model is not None else "model_free"
    loop = LoopState(
        z=plant.z0.copy(),
        z_model=model.z0.copy() if model is not None else None,
        chens=[chen_init(order, np.zeros(alphabet.size)) for _ in tracked],
        learners=[learner_init(learner_config, order) for _ in tracked],
        N=0,
        mode=mode,
    )

    L, dt = disc.L, disc.delta
    nt = len(tracked)
    y_all = np.empty((L, plant.output_dim))
    y_model_all = np.empty((L, plant.output_dim)) if model is not None else None
    errors = np.empty((L, nt))
    u_samples = np.empty((L, alphabet.size))
    u_held_all = np.empty((L, plant.input_dim))
    costs = np.empty(L)
    predictions = np.empty((L, nt))
    innovations = np.empty((L, nt))
    theta_norms = np.empty((L, nt))
    states = np.empty((L + 1, plant.state_dim))
    states[0] = loop.z
    blow_up_at = None

    center = cfg.center(plant.input_dim)
    for N in range(1, L + 1):
        if model is not None and model_feedback:
            loop.z_model = loop.z.copy()
        y_d_next = reference.outputs[N - 1]
        cost_batch = _candidate_cost_fn(loop, y_d_next, cfg, disc, model, tracked, substeps)
        u_held, cost = minimize_box(cost_batch, center, cfg.u_bound, cfg)
        sample = np.concatenate([[dt], u_held * dt])

        try:
            z_next = rk4_step(plant, loop.z, u_held, dt, substeps)
            if not np.all(np.isfinite(z_next)):
                raise SimulationBlowUp(N)
        except (SimulationBlowUp, FloatingPointError):
            blow_up_at = N
            break

        loop.z = z_next
        y = plant.output(loop.z)
        if model is not None:
            loop.z_model = rk4_step(model, loop.z_model, u_held, dt, substeps)
            y_hat = model.output(loop.z_model)
            target = y[list(tracked)] - y_hat[list(tracked)]
            y_model_all[N - 1] = y_hat
        else:
            target = y[list(tracked)]

        for i in range(nt):
            loop.chens[i] = chen_step(loop.chens[i], sample)
            if learning:
                loop.learners[i], yp, inn = learn_step(loop.learners[i], loop.chens[i], target[i])
            else:
                yp = float(regressor(loop.chens[i]) @ loop.learners[i].theta)
                inn = float(target[i]) - yp
            predictions[N - 1, i] = yp
            innovations[N - 1, i] = inn
            theta_norms[N - 1, i] = float(np.linalg.norm(loop.learners[i].theta))

        loop.N = N
        states[N] = loop.z
        y_all[N - 1] = y
        errors[N - 1] = target
        u_samples[N - 1] = sample
        u_held_all[N - 1] = u_held
        costs[N - 1] = cost

    done = L if blow_up_at is None else blow_up_at - 1
    return RunReport(
        t=reference.t[:done],
        y_desired=reference.outputs[:done],
        y=y_all[:done],
        y_model=None if y_model_all is None else y_model_all[:done],
        errors=errors[:done],
        u_samples=u_samples[:done],
        u_held=u_held_all[:done],
        cost=costs[:done],
        predictions=predictions[:done],
        innovations=innovations[:done],
        theta_norms=theta_norms[:done],
        states=states[: done + 1],
        tracked=tracked,
        learning=learning,
        blow_up_at=blow_up_at,
    )
