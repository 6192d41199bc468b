"""TVD Runge-Kutta time stepping, the transition check and the run loop."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, build_problem, ceil_steps, steps_for
from .errors import (
    CFLWarning,
    ConfigurationError,
    DegenerateShockError,
    DGFTError,
    FatalStepError,
    OutflowReached,
    StateBlowupError,
)
from .flux import max_wave_speed
from .semidiscrete import SemiDiscreteScheme
from .shockmesh import ShockState, TransitionEvent, apply_transition, needs_transition
from .smoothness import (
    AntiSmoothingDetector,
    DetectionReport,
    SpatialIndicator,
    TemporalIndicator,
    spatial_indicator,
    temporal_indicator,
)

__all__ = [
    "choose_timestep",
    "tvdrk3",
    "tvdrk3_step",
    "advance",
    "StepRecord",
    "RunRecord",
    "run",
    "run_problem",
]


def choose_timestep(h: float, beta: float, gamma: float = 0.125, alpha: float | None = None,
                    tau: float | None = None, T: float | None = None, p: int = 3) -> float:
    """Time step obeying ``beta tau <= h`` and ``tau <= gamma h^(1+alpha)``.

    A given ``tau`` is only checked (a :class:`CFLWarning` per violated
    inequality).  Otherwise the largest admissible step is rounded down to
    ``1/N`` or, if that does not divide ``T``, to ``T/N``.
    """
    if alpha is None:
        alpha = 1.0 / p if p > 0 else 0.0
    if not beta > 0:
        raise ConfigurationError(f"wave speed bound must be positive, got {beta}")
    limit_strong = gamma * h ** (1.0 + alpha)
    if tau is not None:
        if not tau > 0:
            raise ConfigurationError(f"time step must be positive, got {tau}")
        if beta * tau > h * (1 + 1e-12):
            warnings.warn(f"tau={tau:.6g} violates beta*tau <= h (beta={beta:.6g}, h={h:.6g})",
                          CFLWarning, stacklevel=2)
        if tau > limit_strong * (1 + 1e-12):
            warnings.warn(f"tau={tau:.6g} violates tau <= gamma h^(1+alpha) = {limit_strong:.6g}",
                          CFLWarning, stacklevel=2)
        return float(tau)
    raw = min(h / beta, limit_strong)
    tau = 1.0 / math.ceil(1.0 / raw - 1e-12)
    if T is not None and T > 0:
        r = T / tau
        if abs(r - round(r)) > 1e-9 * max(1.0, r):
            tau = T / ceil_steps(T, raw)
    return tau


STAGE_FRAMES = ("anchored", "moving")

# Shu-Osher form: (weight of W_n, weight of previous stage, fraction of tau, stage time)
TVDRK3_STAGES = ((1.0, 0.0, 1.0, 0.0), (0.75, 0.25, 0.25, 1.0), (1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0, 0.5))


def tvdrk3(psi, W: np.ndarray, t: float, tau: float, check=None) -> np.ndarray:
    """Generic TVDRK-3 step for ``W' = psi(W, t)``; ``check(vec, k)`` runs after each stage."""
    prev = W
    for k, (a, b, c, dt) in enumerate(TVDRK3_STAGES):
        prev = a * W + b * prev + c * tau * psi(prev, t + dt * tau)
        if check is not None:
            check(prev, k)
    return prev


def tvdrk3_step(scheme: SemiDiscreteScheme, state: ShockState, tau: float,
                frame: str = "anchored") -> ShockState:
    """One Shu-Osher TVDRK-3 step on the flat vector ``(x_s, coeffs)``.

    Stages are combined componentwise.  With ``frame="anchored"`` the
    special-cell coefficients stay in the bases of the step's starting cells,
    so the combinations act on the polynomials as functions of ``x``; with
    ``frame="moving"`` they are reference-cell coefficients on cells that move
    with each stage's shock.  A stage shock beyond ``x_{i+1/2} + h/2`` makes
    the step fatal.
    """
    if frame not in STAGE_FRAMES:
        raise ValueError(f"frame must be one of {STAGE_FRAMES}, got {frame!r}")
    mesh = state.mesh
    limit = mesh.grid(mesh.i + 1) + 0.5 * mesh.h
    t = state.t
    W = state.to_vector()

    def stage_check(vec: np.ndarray, k: int) -> None:
        label = ("stage 1", "stage 2", "new state")[k]
        if not np.all(np.isfinite(vec)):
            raise StateBlowupError(f"non-finite values in {label}")
        if vec[0] > limit:
            raise FatalStepError(
                f"{label} shock position {vec[0]:.17g} beyond x_(i+1/2)+h/2={limit:.17g}")

    op = scheme.anchored_psi if frame == "anchored" else scheme.psi
    Wn = tvdrk3(lambda vec, ts: op(vec, state, ts), W, t, tau, stage_check)
    if frame == "anchored":
        return scheme.from_anchored(Wn, state, t + tau)
    return state.from_vector(Wn, t + tau)


def advance(scheme: SemiDiscreteScheme, state: ShockState, tau: float, step: int = -1,
            t_new: float | None = None, frame: str = "anchored"
            ) -> tuple[ShockState, TransitionEvent | None]:
    """One step plus the single transition check; ``t_new`` pins the new time exactly."""
    new = tvdrk3_step(scheme, state, tau, frame)
    if t_new is not None:
        new = new.replace(t=t_new)
    event = None
    if needs_transition(state.mesh, new.x_s):
        new, event = apply_transition(new, step)
    return new, event


@dataclass(frozen=True)
class StepRecord:
    step: int
    t: float
    x_sc: float
    rh_speed: float
    shock_height: float
    lax_ok: bool


@dataclass
class RunRecord:
    config: RunConfig
    tau: float
    n_steps: int
    initial_state: ShockState
    final_state: ShockState | None = None
    steps: list[StepRecord] = field(default_factory=list)
    events: list[TransitionEvent] = field(default_factory=list)
    spatial: list[SpatialIndicator] = field(default_factory=list)
    temporal: list[TemporalIndicator] = field(default_factory=list)
    snapshots: list[ShockState] = field(default_factory=list)
    detections: list[DetectionReport] = field(default_factory=list)
    first_flag: DetectionReport | None = None
    status: str = "completed"
    message: str = ""
    failed_step: int | None = None
    wall_time: float = 0.0

    @property
    def final_x_sc(self) -> float:
        return self.steps[-1].x_sc

    @property
    def final_t(self) -> float:
        return self.steps[-1].t

    @property
    def completed(self) -> bool:
        return self.status == "completed"


def _schedule(config: RunConfig, h: float, beta: float) -> list[tuple[int, float]]:
    pol = config.step_policy
    if config.tau_schedule:
        out = []
        for n, tau in config.tau_schedule:
            choose_timestep(h, beta, pol.gamma, pol.alpha, float(tau), p=config.p)
            out.append((int(n), float(tau)))
        return out
    tau = choose_timestep(h, beta, pol.gamma, pol.alpha, pol.tau, config.T, config.p)
    return [(steps_for(config.T, tau), tau)]


def _step_record(scheme: SemiDiscreteScheme, state: ShockState, step: int) -> StepRecord:
    u_m, u_p = state.traces()
    f = scheme.flux
    try:
        s = scheme.rh_speed(state)
    except DegenerateShockError:
        s = float("nan")
    lax = bool(f(u_p, 1) < s < f(u_m, 1))
    return StepRecord(step, state.t, state.x_s, s, u_m - u_p, lax)


def run_problem(config: RunConfig, scheme: SemiDiscreteScheme,
                state: ShockState) -> RunRecord:
    """Integrate from ``state`` following ``config``; failures end the run with a status."""
    t0 = time.perf_counter()
    h = state.mesh.h
    bound = float(np.max(np.abs(state.coeffs @ scheme.P)))
    bound = max(bound, abs(scheme.inflow.value(state.t)))
    beta = max_wave_speed(scheme.flux, bound)
    schedule = _schedule(config, h, beta)
    n_total = sum(n for n, _ in schedule)
    rec = RunRecord(config, schedule[0][1] if schedule else 0.0, n_total, state)

    det = None
    if config.detector is not None:
        det = AntiSmoothingDetector(**config.detector)
    snaps = sorted(float(t) for t in config.snapshot_times)

    def observe(st: ShockState, n: int, tau: float) -> None:
        rec.steps.append(_step_record(scheme, st, n))
        stride = config.indicator_stride
        want_spatial = stride and n % stride == 0
        if want_spatial or det is not None:
            ind = spatial_indicator(st, scheme.inflow.value(st.t), step=n)
            if want_spatial:
                rec.spatial.append(ind)
            if det is not None:
                report = det.update(ind)
                if report.flagged:
                    rec.detections.append(report)
        if config.temporal_stride and n % config.temporal_stride == 0:
            rec.temporal.append(temporal_indicator(scheme, st, config.temporal_max_order, n,
                                                   config.neglect_shock_correction))
        while snaps and snaps[0] <= st.t + 0.5 * tau:
            if snaps[0] >= st.t - 0.5 * tau:
                rec.snapshots.append(st)
            snaps.pop(0)

    current = state
    n = 0
    try:
        observe(current, 0, schedule[0][1] if schedule else 0.0)
        for count, tau in schedule:
            t_seg = current.t
            for k in range(count):
                n += 1
                current, event = advance(scheme, current, tau, n, t_seg + (k + 1) * tau,
                                         config.stage_frame)
                if event is not None:
                    rec.events.append(event)
                observe(current, n, tau)
    except OutflowReached as exc:
        rec.status, rec.message, rec.failed_step = "outflow_reached", str(exc), n
    except (StateBlowupError, FatalStepError, DegenerateShockError, FloatingPointError) as exc:
        rec.status, rec.message, rec.failed_step = "blowup", str(exc), n
    except DGFTError as exc:
        rec.status, rec.message, rec.failed_step = "blowup", str(exc), n
    rec.final_state = current
    rec.first_flag = det.first_flag if det is not None else None
    rec.wall_time = time.perf_counter() - t0
    return rec


def run(config: RunConfig) -> RunRecord:
    scheme, state = build_problem(config)
    return run_problem(config, scheme, state)
