"""Experiment configuration: a flat INI file with one section per
subsystem, parsed into typed dataclasses and serialized back verbatim.

The defaults reproduce the stock discretization (L=100, J=3, T=6,
eps=0.05) and the unit-parameter predator-prey plant, so an empty file
is a valid experiment.  Overrides take the form section.key=value.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

import numpy as np

from .learner import DEFAULT_RESET_PERIOD
from .plant import DiscretizationConfig, LotkaVolterraParams

__all__ = ["ExperimentConfig", "parse_config", "serialize_config", "apply_override"]


@dataclass
class ControllerSettings:
    u_bound: float = 2.0
    W: np.ndarray = field(default_factory=lambda: np.eye(2))
    u_nominal: tuple[float, ...] = (1.0, 1.0)
    grid_points: int = 21
    refine_rounds: int = 10
    multistart: int = 3
    nm_maxiter: int = 120


@dataclass
class LearnerSettings:
    reset_period: int = DEFAULT_RESET_PERIOD
    p0_scale: float = 1.0


@dataclass
class ReferenceSettings:
    v_offset: float = 0.75
    window: tuple[float, float] = (0.6, 4.2)
    z0: tuple[float, float] = (0.4, 0.6)


@dataclass
class ExperimentConfig:
    fixture: str = "exact_model"
    row: str = ""
    seed: int = 0
    out: str = ""
    disc: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    plant: LotkaVolterraParams = field(default_factory=LotkaVolterraParams)
    model: LotkaVolterraParams = field(default_factory=LotkaVolterraParams)
    controller: ControllerSettings = field(default_factory=ControllerSettings)
    learner: LearnerSettings = field(default_factory=LearnerSettings)
    reference: ReferenceSettings = field(default_factory=ReferenceSettings)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, np.ndarray):
        return "; ".join(", ".join(repr(float(x)) for x in row) for row in np.atleast_2d(value))
    if isinstance(value, (tuple, list)):
        return ", ".join(repr(float(x)) for x in value)
    return str(value)


def _parse_matrix(text: str) -> np.ndarray:
    rows = [
        [float(x) for x in row.split(",")]
        for row in text.split(";")
        if row.strip()
    ]
    return np.array(rows)


def _parse_pair(text: str) -> tuple[float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated values, got {text!r}")
    return (parts[0], parts[1])


def serialize_config(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser()
    parser["run"] = {
        "fixture": cfg.fixture,
        "row": cfg.row,
        "seed": str(cfg.seed),
        "out": cfg.out,
    }
    parser["discretization"] = {
        "T": _fmt(cfg.disc.T),
        "L": str(cfg.disc.L),
        "J": str(cfg.disc.J),
        "epsilon": _fmt(cfg.disc.eps),
    }
    for section, params in (("plant", cfg.plant), ("model", cfg.model)):
        parser[section] = {
            "alpha12": _fmt(params.alpha12),
            "alpha21": _fmt(params.alpha21),
            "beta1": _fmt(params.beta1),
            "beta2": _fmt(params.beta2),
        }
    parser["controller"] = {
        "u_bound": _fmt(cfg.controller.u_bound),
        "W": _fmt(cfg.controller.W),
        "u_nominal": _fmt(cfg.controller.u_nominal),
        "grid_points": str(cfg.controller.grid_points),
        "refine_rounds": str(cfg.controller.refine_rounds),
        "multistart": str(cfg.controller.multistart),
        "nm_maxiter": str(cfg.controller.nm_maxiter),
    }
    parser["learner"] = {
        "reset_period": str(cfg.learner.reset_period),
        "p0_scale": _fmt(cfg.learner.p0_scale),
    }
    parser["reference"] = {
        "v_offset": _fmt(cfg.reference.v_offset),
        "window": _fmt(cfg.reference.window),
        "z0": _fmt(cfg.reference.z0),
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a configuration from INI text; unknown keys are rejected.

    Values present in the text win over the base configuration (the
    stock defaults when no base is given).
    """
    parser = configparser.ConfigParser()
    try:
        if base is not None:
            parser.read_string(serialize_config(base))
        parser.read_string(text)
    except configparser.Error as exc:
        raise ValueError(f"malformed config: {exc}") from exc

    cfg = ExperimentConfig()
    known = {
        "run": {"fixture", "row", "seed", "out"},
        "discretization": {"t", "l", "j", "epsilon"},
        "plant": {"alpha12", "alpha21", "beta1", "beta2"},
        "model": {"alpha12", "alpha21", "beta1", "beta2"},
        "controller": {
            "u_bound", "w", "u_nominal", "grid_points", "refine_rounds",
            "multistart", "nm_maxiter",
        },
        "learner": {"reset_period", "p0_scale"},
        "reference": {"v_offset", "window", "z0"},
    }
    for section in parser.sections():
        if section not in known:
            raise ValueError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in known[section]:
                raise ValueError(f"unknown config key {section}.{key}")

    def get(section, key, default=None):
        return parser.get(section, key, fallback=default)

    if parser.has_section("run"):
        cfg.fixture = get("run", "fixture", cfg.fixture)
        cfg.row = get("run", "row", cfg.row)
        cfg.seed = int(get("run", "seed", str(cfg.seed)))
        cfg.out = get("run", "out", cfg.out)
    if parser.has_section("discretization"):
        cfg.disc = DiscretizationConfig(
            T=float(get("discretization", "t", repr(cfg.disc.T))),
            L=int(get("discretization", "l", str(cfg.disc.L))),
            J=int(get("discretization", "j", str(cfg.disc.J))),
            eps=float(get("discretization", "epsilon", repr(cfg.disc.eps))),
        )
    for section in ("plant", "model"):
        if parser.has_section(section):
            current = getattr(cfg, section)
            setattr(cfg, section, LotkaVolterraParams(
                alpha12=float(get(section, "alpha12", repr(current.alpha12))),
                alpha21=float(get(section, "alpha21", repr(current.alpha21))),
                beta1=float(get(section, "beta1", repr(current.beta1))),
                beta2=float(get(section, "beta2", repr(current.beta2))),
            ))
    if parser.has_section("controller"):
        c = cfg.controller
        cfg.controller = ControllerSettings(
            u_bound=float(get("controller", "u_bound", repr(c.u_bound))),
            W=_parse_matrix(get("controller", "w", _fmt(c.W))),
            u_nominal=tuple(
                float(x) for x in get("controller", "u_nominal", _fmt(c.u_nominal)).split(",")
            ),
            grid_points=int(get("controller", "grid_points", str(c.grid_points))),
            refine_rounds=int(get("controller", "refine_rounds", str(c.refine_rounds))),
            multistart=int(get("controller", "multistart", str(c.multistart))),
            nm_maxiter=int(get("controller", "nm_maxiter", str(c.nm_maxiter))),
        )
    if parser.has_section("learner"):
        cfg.learner = LearnerSettings(
            reset_period=int(get("learner", "reset_period", str(cfg.learner.reset_period))),
            p0_scale=float(get("learner", "p0_scale", repr(cfg.learner.p0_scale))),
        )
    if parser.has_section("reference"):
        r = cfg.reference
        cfg.reference = ReferenceSettings(
            v_offset=float(get("reference", "v_offset", repr(r.v_offset))),
            window=_parse_pair(get("reference", "window", _fmt(r.window))),
            z0=_parse_pair(get("reference", "z0", _fmt(r.z0))),
        )
    return cfg


def apply_override(cfg: ExperimentConfig, override: str) -> ExperimentConfig:
    """Apply one section.key=value override by round-tripping through INI."""
    if "=" not in override or "." not in override.split("=", 1)[0]:
        raise ValueError(f"override must look like section.key=value, got {override!r}")
    target, value = override.split("=", 1)
    section, key = target.split(".", 1)
    parser = configparser.ConfigParser()
    parser.read_string(serialize_config(cfg))
    if not parser.has_section(section):
        raise ValueError(f"unknown config section [{section}]")
    parser.set(section.strip(), key.strip(), value.strip())
    buf = io.StringIO()
    parser.write(buf)
    return parse_config(buf.getvalue())
