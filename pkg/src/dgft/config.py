"""Run configuration and problem construction.

A configuration is a single JSON document; :func:`RunConfig.from_dict`
accepts the same keys as the dataclass fields.  The ``"sec6"`` initial
condition is the Burgers' shock example on ``(0, 10)`` with the shock at 3.18.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .errors import ConfigurationError
from .flux import FluxModel, admissible_interval
from .polykernel import gauss_rule, project_function
from .semidiscrete import Inflow, SemiDiscreteScheme
from .shockmesh import ShockState, build_initial_mesh

__all__ = [
    "StepPolicy",
    "RunConfig",
    "sec6_initial_condition",
    "build_problem",
    "project_initial_state",
]

SEC6_DOMAIN = (0.0, 10.0)
SEC6_SHOCK = 3.18
SEC6_INFLOW = 1.2
# accepted names of the built-in initial condition
PRESET_NAMES = ("sec6", "paper-sec6")


def _sec6_left(x):
    return 1.2 + 0.4 * np.sin(x / 1.4) ** 4


def _sec6_right(x):
    return 0.8 - 0.3 * np.sin((x - 3.1) / 0.85)


def sec6_initial_condition() -> tuple[Callable, Callable]:
    """Left and right smooth pieces of the Burgers' shock example."""
    return _sec6_left, _sec6_right


_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "sinh", "cosh",
                 "arctan", "abs", "pi", "e")
}


def _compile_expr(expr: str, var: str) -> Callable:
    try:
        code = compile(expr, f"<{var}-expression>", "eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"cannot parse expression {expr!r}: {exc}") from exc
    for name in code.co_names:
        if name != var and name not in _EXPR_NAMESPACE:
            raise ConfigurationError(f"expression {expr!r} uses unknown name {name!r}")

    def fn(value):
        return eval(code, {"__builtins__": {}}, {**_EXPR_NAMESPACE, var: value})

    return fn


@dataclass
class StepPolicy:
    """CFL constants: ``beta tau <= h`` and ``tau <= gamma h^(1+alpha)``."""

    gamma: float = 0.125
    alpha: float | None = None
    tau: float | None = None


@dataclass
class RunConfig:
    domain: tuple[float, float] = SEC6_DOMAIN
    m: int = 20
    p: int = 3
    flux: Any = "burgers"
    initial_condition: Any = "sec6"
    x_s0: float = SEC6_SHOCK
    inflow: Any = SEC6_INFLOW
    T: float = 4.0
    step_policy: StepPolicy = field(default_factory=StepPolicy)
    # [(n_steps, tau), ...]; overrides step_policy when given
    tau_schedule: list | None = None
    indicator_stride: int = 1
    temporal_stride: int = 1
    temporal_max_order: int = 4
    snapshot_times: list = field(default_factory=list)
    snapshot_points: int = 8
    output_dir: str | None = None
    quadrature_nodes: int | None = None
    neglect_shock_correction: bool = False
    # "anchored" or "moving"; see timestepper.tvdrk3_step
    stage_frame: str = "anchored"
    height_floor: float = 1e-6
    admissible_margin: float = 0.1
    # {"growth": 2, "persistence": 2, "window": 3, "floor": 1.0}; None disables
    detector: dict | None = None

    @property
    def h(self) -> float:
        return (self.domain[1] - self.domain[0]) / self.m

    def validate(self) -> None:
        a, b = self.domain
        if not b > a:
            raise ConfigurationError(f"empty domain {self.domain}")
        if self.p < 0:
            raise ConfigurationError(f"degree must be nonnegative, got p={self.p}")
        if self.T < 0:
            raise ConfigurationError(f"end time must be nonnegative, got T={self.T}")
        if self.quadrature_nodes is not None and not 1 <= self.quadrature_nodes <= 32:
            raise ConfigurationError("quadrature_nodes must be in 1..32")
        if self.indicator_stride < 0 or self.temporal_stride < 0:
            raise ConfigurationError("indicator strides must be nonnegative")
        if not 0 <= self.temporal_max_order <= 4:
            raise ConfigurationError("temporal_max_order must be in 0..4")
        if self.stage_frame not in ("anchored", "moving"):
            raise ConfigurationError(f"stage_frame must be 'anchored' or 'moving', "
                                     f"got {self.stage_frame!r}")
        if self.tau_schedule is not None:
            for entry in self.tau_schedule:
                n, tau = entry
                if int(n) != n or n < 0 or not tau > 0:
                    raise ConfigurationError(f"bad tau_schedule entry {entry!r}")
        build_initial_mesh(a, b, self.m, self.x_s0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["domain"] = list(self.domain)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        if "h" in data:
            raise ConfigurationError("give m, not h")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "step_policy" in data and isinstance(data["step_policy"], dict):
            try:
                data["step_policy"] = StepPolicy(**data["step_policy"])
            except TypeError as exc:
                raise ConfigurationError(f"bad step_policy: {exc}") from exc
        if "domain" in data:
            data["domain"] = tuple(float(v) for v in data["domain"])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


def _initial_pieces(spec: Any) -> tuple[Callable, Callable]:
    if isinstance(spec, str):
        if spec not in PRESET_NAMES:
            raise ConfigurationError(f"unknown initial condition preset {spec!r}")
        return sec6_initial_condition()
    if isinstance(spec, dict) and {"left", "right"} <= set(spec):
        return _compile_expr(spec["left"], "x"), _compile_expr(spec["right"], "x")
    raise ConfigurationError(
        "initial_condition must be 'sec6' or {'left': expr, 'right': expr}")


def _inflow(spec: Any) -> Inflow:
    if isinstance(spec, (int, float)):
        return Inflow.constant(float(spec))
    if isinstance(spec, str):
        fn = _compile_expr(spec, "t")
        return Inflow.from_callable(lambda t: float(fn(t)))
    raise ConfigurationError(f"inflow must be a number or an expression in t, got {spec!r}")


def project_initial_state(mesh, left: Callable, right: Callable, p: int,
                          q: int | None = None) -> ShockState:
    """Cellwise L2 projection of the piecewise initial data on the shock mesh."""
    rule = gauss_rule(q or p + 3)
    edges = mesh.edges()
    coeffs = np.empty((edges.size - 1, p + 1))
    for k in range(edges.size - 1):
        piece = left if edges[k + 1] <= mesh.x_sc else right
        coeffs[k] = project_function(piece, (edges[k], edges[k + 1]), p, rule).coeffs
    return ShockState(mesh, coeffs, 0.0)


def build_problem(config: RunConfig) -> tuple[SemiDiscreteScheme, ShockState]:
    """Flux, operator and projected initial state for a configuration."""
    config.validate()
    a, b = config.domain
    mesh = build_initial_mesh(a, b, config.m, config.x_s0)
    left, right = _initial_pieces(config.initial_condition)
    inflow = _inflow(config.inflow)

    xl = np.linspace(a, config.x_s0, 2001)[:-1]
    xr = np.linspace(config.x_s0, b, 2001)[1:]
    tb = np.linspace(0.0, max(config.T, 0.0), 201)
    sample = np.concatenate([np.broadcast_to(left(xl), xl.shape),
                             np.broadcast_to(right(xr), xr.shape),
                             [inflow.value(t) for t in tb]])
    if not np.all(np.isfinite(sample)):
        raise ConfigurationError("initial or boundary data is not finite")
    u_min, u_max = admissible_interval(sample, config.admissible_margin)
    flux = FluxModel.from_spec(config.flux, u_min, u_max)

    q = config.quadrature_nodes or config.p + 3
    scheme = SemiDiscreteScheme(flux, config.p, inflow, q=q,
                                height_floor=config.height_floor)
    state = project_initial_state(mesh, left, right, config.p, q)
    return scheme, state


def is_integer_ratio(T: float, tau: float, rtol: float = 1e-9) -> bool:
    r = T / tau
    return abs(r - round(r)) <= rtol * max(1.0, r)


def steps_for(T: float, tau: float) -> int:
    if not is_integer_ratio(T, tau):
        raise ConfigurationError(f"time step {tau!r} does not divide T={T!r}")
    return int(round(T / tau))


def ceil_steps(T: float, tau_max: float) -> int:
    return max(1, math.ceil(T / tau_max - 1e-12))
