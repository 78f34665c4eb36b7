"""Named, reproducible experiments and their row variants.

Each fixture builds its plant, design model, reference, and controller
from an ExperimentConfig and returns the labeled run reports plus
summary rows for the CSV writers.  Rows name model-parameter
perturbations in percent relative to the plant, e.g. a21_plus20 puts
+20% on alpha21 in the model copy only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chen import chen_init, chen_step, regressor
from .config import ExperimentConfig
from .control import (
    ControllerConfig,
    ReferenceTrajectory,
    RunReport,
    closed_loop_run,
    orbit_transfer_reference,
)
from .learner import LearnerConfig, learn_step, learner_init
from .plant import (
    DiscretizationConfig,
    discretize_input,
    exp_model,
    integrate,
    lv_model,
)
from .words import Alphabet, order_vector

__all__ = [
    "FIXTURES",
    "PERTURBED_ROWS",
    "SINGLE_INPUT_ROWS",
    "LabeledRun",
    "DemoResult",
    "fixture_defaults",
    "run_fixture",
    "balanced_prior",
    "demo_forcing",
]

PERTURBED_ROWS = {
    "a12_minus20": {"alpha12": -20.0},
    "a12_plus20": {"alpha12": 20.0},
    "a21_minus20": {"alpha21": -20.0},
    "a21_plus20": {"alpha21": 20.0},
}

SINGLE_INPUT_ROWS = {
    "a12_minus5": {"alpha12": -5.0},
    "a21_minus5": {"alpha21": -5.0},
    "b2_minus5": {"beta2": -5.0},
}


@dataclass(frozen=True)
class LabeledRun:
    """One closed-loop run with its variant label and summary row."""

    label: str
    report: RunReport
    summary_row: dict


@dataclass(frozen=True)
class DemoResult:
    """Output of the scalar online-learning demo."""

    t: np.ndarray
    y: np.ndarray
    y_pred: np.ndarray
    innovations: np.ndarray
    theta_norms: np.ndarray
    samples: np.ndarray
    first_quarter_rms: float
    final_quarter_rms: float

    @property
    def ratio(self) -> float:
        return self.final_quarter_rms / self.first_quarter_rms


def demo_forcing(t):
    """Decaying sinusoid driving the scalar demo plant."""
    return np.atleast_1d(2.0 * np.exp(-t / 3.0) * np.sin(2.0 * np.pi * t))


def balanced_prior(order, reference: ReferenceTrajectory, disc: DiscretizationConfig) -> np.ndarray:
    """Diagonal initial covariance that equalizes regressor scales.

    The iterated sums along a record span several orders of magnitude
    (pure-drift words grow polynomially in time), so a flat prior
    over-weights the large features.  Running the series along the
    reference input record, known to the designer, gives per-feature
    RMS scales; the prior variance of each coefficient is set to the
    inverse square of its feature's scale.
    """
    state = chen_init(order, np.zeros(order.alphabet.size))
    sq = np.zeros(len(order))
    for u in reference.u_held:
        sample = np.concatenate([[disc.delta], u * disc.delta])
        state = chen_step(state, sample)
        sq += np.square(regressor(state))
    scales = np.sqrt(sq / len(reference))
    scales = np.maximum(scales, 1e-3)
    return np.diag(1.0 / scales**2)


def _learner_config(cfg: ExperimentConfig, order, reference, disc) -> LearnerConfig:
    P0 = cfg.learner.p0_scale * balanced_prior(order, reference, disc)
    return LearnerConfig(P0=P0, reset_period=cfg.learner.reset_period)


def _controller(cfg: ExperimentConfig, input_dim: int) -> ControllerConfig:
    c = cfg.controller
    nominal = np.asarray(c.u_nominal, dtype=float)[:input_dim]
    return ControllerConfig(
        u_bound=c.u_bound,
        W=c.W,
        u_nominal=nominal,
        grid_points=c.grid_points,
        refine_rounds=c.refine_rounds,
        multistart=c.multistart,
        nm_maxiter=c.nm_maxiter,
    )


def _reference(cfg: ExperimentConfig, controlled=(True, True)) -> ReferenceTrajectory:
    return orbit_transfer_reference(
        cfg.plant,
        cfg.disc,
        controlled=controlled,
        z0=cfg.reference.z0,
        v_offset=cfg.reference.v_offset,
        window=cfg.reference.window,
        u_bound=cfg.controller.u_bound,
    )


def _summary_row(perturbation: str, label: str, report: RunReport) -> dict:
    s = report.summary
    dy = list(np.asarray(s.dy, dtype=float))
    return {
        "perturbation": perturbation,
        "variant": label,
        "dy1": dy[0],
        "dy2": dy[1] if len(dy) > 1 else float("nan"),
        "u_inf": s.u_inf,
    }


def _closed_loop_fixture(
    cfg: ExperimentConfig,
    perturbation_label: str,
    model_params,
    controlled=(True, True),
    tracked=None,
    variants=("learning_on",),
    model_free: bool = False,
) -> list[LabeledRun]:
    reference = _reference(cfg, controlled)
    input_dim = sum(controlled)
    controller = _controller(cfg, input_dim)
    order = order_vector(Alphabet(input_dim), cfg.disc.J)
    learner_cfg = _learner_config(cfg, order, reference, cfg.disc)

    runs = []
    for label in variants:
        plant = lv_model(cfg.plant, controlled, cfg.reference.z0)
        model = None if model_free else lv_model(model_params, controlled, cfg.reference.z0)
        report = closed_loop_run(
            plant,
            model,
            reference,
            controller,
            cfg.disc,
            learner_config=learner_cfg,
            tracked=tracked,
            learning=(label == "learning_on"),
            model_feedback=False,
        )
        runs.append(LabeledRun(label, report, _summary_row(perturbation_label, label, report)))
    return runs


def run_exact_model(cfg: ExperimentConfig, row: str = "") -> list[LabeledRun]:
    return _closed_loop_fixture(cfg, "exact_model", cfg.plant)


def run_perturbed(cfg: ExperimentConfig, row: str) -> list[LabeledRun]:
    deltas = PERTURBED_ROWS[row]
    model_params = cfg.plant.perturbed(**deltas)
    cfg.model = model_params
    return _closed_loop_fixture(
        cfg, row, model_params, variants=("learning_on", "learning_off")
    )


def run_model_free(cfg: ExperimentConfig, row: str = "") -> list[LabeledRun]:
    return _closed_loop_fixture(cfg, "model_free", None, model_free=True)


def _single_input_fixture(cfg: ExperimentConfig, row: str, tracked) -> list[LabeledRun]:
    deltas = SINGLE_INPUT_ROWS[row]
    model_params = cfg.plant.perturbed(**deltas)
    cfg.model = model_params
    return _closed_loop_fixture(
        cfg, row, model_params, controlled=(True, False), tracked=tracked
    )


def run_siso_y1(cfg, row):
    return _single_input_fixture(cfg, row, tracked=(0,))


def run_siso_y2(cfg, row):
    return _single_input_fixture(cfg, row, tracked=(1,))


def run_simo(cfg, row):
    return _single_input_fixture(cfg, row, tracked=(0, 1))


def run_learning_demo(cfg: ExperimentConfig, row: str = "") -> DemoResult:
    """Scalar plant zdot = u, y = exp(z) identified online from a single
    decaying-sinusoid record; prediction error should shrink as data
    accumulates."""
    disc = cfg.disc
    plant = exp_model()
    truth = integrate(plant, lambda t: demo_forcing(t), disc)
    samples = discretize_input(lambda t: demo_forcing(t), disc, drift=False)

    order = order_vector(Alphabet(1, drift=False), disc.J)
    learner = learner_init(
        LearnerConfig(reset_period=cfg.learner.reset_period), order
    )
    chen = chen_init(order, np.zeros(1))

    L = disc.L
    y = truth.outputs[1:, 0]
    y_pred = np.empty(L)
    innovations = np.empty(L)
    theta_norms = np.empty(L)
    for N in range(L):
        chen = chen_step(chen, samples[N])
        learner, y_pred[N], innovations[N] = learn_step(learner, chen, y[N])
        theta_norms[N] = float(np.linalg.norm(learner.theta))

    quarter = L // 4
    first = float(np.sqrt(np.mean((y_pred[:quarter] - y[:quarter]) ** 2)))
    final = float(np.sqrt(np.mean((y_pred[-quarter:] - y[-quarter:]) ** 2)))
    return DemoResult(
        truth.t[1:], y, y_pred, innovations, theta_norms, samples, first, final
    )


@dataclass(frozen=True)
class Fixture:
    runner: Callable
    rows: tuple[str, ...]
    default_row: str
    configure: Callable[[ExperimentConfig], None]


def _mimo_defaults(cfg, u_bound: float, W=None) -> None:
    cfg.controller.u_bound = u_bound
    cfg.controller.W = np.eye(2) if W is None else np.asarray(W, dtype=float)
    cfg.controller.u_nominal = (1.0, 1.0)


FIXTURES: dict[str, Fixture] = {
    "exact_model": Fixture(
        run_exact_model, (), "", lambda cfg: _mimo_defaults(cfg, 2.0)
    ),
    "perturbed": Fixture(
        run_perturbed,
        tuple(PERTURBED_ROWS),
        "a21_plus20",
        lambda cfg: _mimo_defaults(cfg, 0.5),
    ),
    "model_free": Fixture(
        run_model_free,
        (),
        "",
        lambda cfg: _mimo_defaults(cfg, 1.0, [[1.0, 0.25], [0.25, 1.0]]),
    ),
    "siso_y1": Fixture(
        run_siso_y1,
        tuple(SINGLE_INPUT_ROWS),
        "a12_minus5",
        lambda cfg: _mimo_defaults(cfg, 1.4, [[1.0]]),
    ),
    "siso_y2": Fixture(
        run_siso_y2,
        tuple(SINGLE_INPUT_ROWS),
        "a12_minus5",
        lambda cfg: _mimo_defaults(cfg, 1.4, [[1.0]]),
    ),
    "simo": Fixture(
        run_simo,
        tuple(SINGLE_INPUT_ROWS),
        "a12_minus5",
        lambda cfg: _mimo_defaults(cfg, 1.4, [[1.0, 0.25], [0.25, 2.0]]),
    ),
    "learning_demo": Fixture(run_learning_demo, (), "", lambda cfg: None),
}


def fixture_defaults(name: str, row: str = "") -> ExperimentConfig:
    """ExperimentConfig pre-filled with the fixture's stock settings."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}")
    fixture = FIXTURES[name]
    if fixture.rows:
        row = row or fixture.default_row
        if row not in fixture.rows:
            raise KeyError(f"unknown row {row!r} for fixture {name!r}; choose from {fixture.rows}")
    elif row:
        raise KeyError(f"fixture {name!r} takes no row")
    cfg = ExperimentConfig(fixture=name, row=row)
    fixture.configure(cfg)
    return cfg


def run_fixture(cfg: ExperimentConfig):
    """Dispatch to the named fixture; returns LabeledRun list or DemoResult."""
    fixture = FIXTURES[cfg.fixture]
    return fixture.runner(cfg, cfg.row)
