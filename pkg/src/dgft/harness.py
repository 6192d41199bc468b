"""Experiment drivers: the Burgers' preset, convergence sweeps, the
anti-smoothing scenario and CSV/JSON emission."""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import RunConfig, StepPolicy, ceil_steps, is_integer_ratio
from .errors import CFLWarning, ConfigurationError
from .smoothness import DetectionReport, jump_orders
from .timestepper import RunRecord, run

__all__ = [
    "REFERENCE_TAU",
    "REFERENCE_X_SC",
    "TAU_RULES",
    "sec6_config",
    "run_preset_sec6",
    "rule_tau",
    "ConvergenceRow",
    "ConvergenceTable",
    "convergence_study",
    "AntiSmoothingReport",
    "run_anti_smoothing_scenario",
    "emit_outputs",
    "emit_table",
    "parse_length",
]

# 1/tau keyed by 1/h for the four named step rules
REFERENCE_TAU = {
    "T1": {2: 25, 4: 64, 8: 160, 16: 400, 32: 1024, 64: 2560},
    "T2": {2: 20, 4: 50, 8: 128, 16: 320, 32: 800, 64: 2048},
    "T3": {2: 20, 4: 48, 8: 112, 16: 256, 32: 576, 64: 1280},
    "T4": {2: 32, 4: 64, 8: 128, 16: 256, 32: 512, 64: 1024},
}

# reference x_sc(4) for those steps, keyed like REFERENCE_TAU
REFERENCE_X_SC = {
    "T1": {2: 7.353087041875537, 4: 7.353125111551957, 8: 7.353126424273150,
           16: 7.353126494307232, 32: 7.353126498430261, 64: 7.353126498665473},
    "T2": {2: 7.353059324500445, 4: 7.353123395074651, 8: 7.353126345518764,
           16: 7.353126489997938, 32: 7.353126498150260, 64: 7.353126498650710},
    "T3": {2: 7.353059324500445, 4: 7.353122977913548, 8: 7.353126260423104,
           16: 7.353126481224717, 32: 7.353126497233903, 64: 7.353126498553604},
    "T4": {2: 7.353107562791714, 4: 7.353125111551957, 8: 7.353126345518764,
           16: 7.353126481224717, 32: 7.353126496598886, 64: 7.353126498428824},
}

TAU_RULES = {
    "T1": lambda h: h ** (4.0 / 3.0) / 10.0,
    "T2": lambda h: h ** (4.0 / 3.0) / 8.0,
    "T3": lambda h: h ** (7.0 / 6.0) / 10.0,
    "T4": lambda h: h / 16.0,
}

SEC6_LENGTH = 10.0


def parse_length(text: str | float) -> float:
    """Accept ``0.25``, ``"1/4"`` or ``"0.25"``."""
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"cannot parse length {text!r}") from exc


def _m_for(h: float, length: float = SEC6_LENGTH) -> int:
    m = round(length / h)
    if m < 1 or abs(m * h - length) > 1e-9 * length:
        raise ConfigurationError(f"h={h!r} does not divide the domain length {length}")
    return int(m)


def sec6_config(h: float, tau: float | None = None, T: float = 4.0, **overrides) -> RunConfig:
    """Burgers' shock example on (0, 10), shock at 3.18, inflow 1.2."""
    cfg = RunConfig(m=_m_for(h), T=T, step_policy=StepPolicy(tau=tau), **overrides)
    if tau is not None and not is_integer_ratio(T, tau):
        raise ConfigurationError(f"tau={tau!r} does not divide T={T!r}")
    cfg.validate()
    return cfg


def run_preset_sec6(h: float, tau: float, T: float = 4.0, **overrides) -> RunRecord:
    return run(sec6_config(h, tau, T, **overrides))


def rule_tau(rule: str, h: float, T: float = 4.0) -> float:
    """Tabulated step for a named rule when available, else the rule rounded down to divide ``T``."""
    if rule not in TAU_RULES:
        raise ConfigurationError(f"unknown time step rule {rule!r}; expected one of {sorted(TAU_RULES)}")
    inv_h = round(1.0 / h)
    if abs(inv_h * h - 1.0) < 1e-12 and inv_h in REFERENCE_TAU[rule]:
        return 1.0 / REFERENCE_TAU[rule][inv_h]
    return T / ceil_steps(T, TAU_RULES[rule](h))


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    tau: float
    x_sc: float | None
    status: str = "completed"
    message: str = ""


@dataclass
class ConvergenceTable:
    """Shock positions per mesh; differences and ratios are always recomputed."""

    rule: str
    rows: list[ConvergenceRow] = field(default_factory=list)

    @property
    def x_sc(self) -> list[float | None]:
        return [r.x_sc for r in self.rows]

    @property
    def differences(self) -> list[float | None]:
        out: list[float | None] = [None]
        for prev, cur in zip(self.rows, self.rows[1:]):
            out.append(None if prev.x_sc is None or cur.x_sc is None else abs(cur.x_sc - prev.x_sc))
        return out

    @property
    def ratios(self) -> list[float | None]:
        d = self.differences
        out: list[float | None] = [None] * len(d)
        for k in range(2, len(d)):
            if d[k - 1] is not None and d[k]:
                out[k] = d[k - 1] / d[k]
        return out


def _sweep_one(args: tuple[float, float, float]) -> ConvergenceRow:
    h, tau, T = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CFLWarning)
        try:
            rec = run(sec6_config(h, tau, T, indicator_stride=0, temporal_stride=0))
        except ConfigurationError as exc:
            return ConvergenceRow(h, tau, None, "config_error", str(exc))
    if rec.status != "completed":
        return ConvergenceRow(h, tau, None, rec.status, rec.message)
    return ConvergenceRow(h, tau, rec.final_x_sc)


def convergence_study(h_list, tau_rule: str | list = "T1", T: float = 4.0,
                      workers: int | None = None) -> ConvergenceTable:
    """Run the Burgers' preset for each ``h`` (coarse to fine) under one step rule.

    Runs are independent and may execute in parallel; row order follows ``h_list``.
    """
    h_list = [float(h) for h in h_list]
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ConfigurationError("h_list must be strictly decreasing")
    if isinstance(tau_rule, str):
        name = tau_rule
        taus = [rule_tau(tau_rule, h, T) for h in h_list]
    else:
        name = "custom"
        taus = [float(t) for t in tau_rule]
        if len(taus) != len(h_list):
            raise ConfigurationError("explicit tau list must match h_list")
    jobs = [(h, tau, T) for h, tau in zip(h_list, taus)]
    workers = workers if workers is not None else min(len(jobs), os.cpu_count() or 1)
    if workers <= 1 or len(jobs) == 1:
        rows = [_sweep_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_one, jobs))
    return ConvergenceTable(name, rows)


@dataclass
class AntiSmoothingReport:
    h: float
    bad_tau: float
    good_tau: float
    switch_step: int
    first_flag: DetectionReport | None
    # max |D^0| over boundaries, per step of the unstable run (index = step)
    amplitude: list[float]
    unstable_status: str
    unstable_failed_step: int | None
    stable_max_D0: float
    stable_flags: int
    recovery_status: str
    recovery_final_t: float
    recovery_flags_after_switch: int
    records: dict = field(default_factory=dict, repr=False)

    @property
    def first_flag_step(self) -> int | None:
        return None if self.first_flag is None else self.first_flag.step

    def amplitude_at(self, step: int) -> float:
        return self.amplitude[step] if step < len(self.amplitude) else float("nan")

    @property
    def recovered(self) -> bool:
        return self.recovery_status == "completed" and self.recovery_flags_after_switch == 0


def _max_abs_D0(rec: RunRecord) -> list[float]:
    return [float(np.nanmax(np.abs(ind.D[:, 0]))) for ind in rec.spatial]


def run_anti_smoothing_scenario(h: float = 1 / 32, bad_tau: float = 1 / 320,
                                good_tau: float | None = None, switch_step: int = 4,
                                unstable_steps: int = 40, T: float = 4.0,
                                detector: dict | None = None,
                                temporal: bool = False) -> AntiSmoothingReport:
    """Unstable run with a too-large step, the stable reference and the recovery run.

    The recovery run takes ``switch_step`` steps with ``bad_tau`` and then
    continues with ``good_tau`` (default ``h/20``) to ``T``.  Flags raised
    during the first ``switch_step`` steps belong to the unstable phase and are
    not counted against the recovery.
    """
    good_tau = h / 20.0 if good_tau is None else good_tau
    detector = detector or {"growth": 2.0, "persistence": 2, "window": 3, "floor": 1.0}
    common = dict(detector=detector, temporal_stride=1 if temporal else 0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CFLWarning)
        bad = run(sec6_config(h, bad_tau, unstable_steps * bad_tau, **common))
        stable = run(sec6_config(h, good_tau, T, **common))
        rest = T - switch_step * bad_tau
        n_rest = round(rest / good_tau)
        if abs(n_rest * good_tau - rest) > 1e-9 * T:
            raise ConfigurationError("good_tau does not divide the remaining time after the switch")
        recovery = run(sec6_config(h, None, T, tau_schedule=[(switch_step, bad_tau),
                                                              (n_rest, good_tau)], **common))

    return AntiSmoothingReport(
        h=h, bad_tau=bad_tau, good_tau=good_tau, switch_step=switch_step,
        first_flag=bad.first_flag,
        amplitude=_max_abs_D0(bad),
        unstable_status=bad.status,
        unstable_failed_step=bad.failed_step,
        stable_max_D0=max(_max_abs_D0(stable)),
        stable_flags=len(stable.detections),
        recovery_status=recovery.status,
        recovery_final_t=recovery.final_t,
        recovery_flags_after_switch=sum(1 for d in recovery.detections if d.step > switch_step),
        records={"unstable": bad, "stable": stable, "recovery": recovery},
    )


# ----------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return ""
    return f"{v:.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _snapshot_rows(state, points: int):
    xi = np.linspace(-1.0, 1.0, points)
    for poly in state.polys():
        x = poly.x_lo + 0.5 * (xi + 1.0) * poly.width
        x[0], x[-1] = poly.x_lo, poly.x_hi
        for xv, uv in zip(x, poly(x)):
            yield (xv, uv)


def emit_outputs(record: RunRecord, out_dir: str | Path,
                 table: ConvergenceTable | None = None) -> list[Path]:
    """Write the run files into ``out_dir``; returns the written paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    p = record.initial_state.p

    meta = {
        "config": record.config.to_dict(),
        "status": record.status,
        "message": record.message,
        "failed_step": record.failed_step,
        "tau": record.tau,
        "n_steps": record.n_steps,
        "steps_taken": record.steps[-1].step if record.steps else 0,
        "final_t": record.final_t if record.steps else None,
        "final_x_sc": record.final_x_sc if record.steps else None,
        "transitions": len(record.events),
        "first_flag_step": None if record.first_flag is None else record.first_flag.step,
        "wall_time": record.wall_time,
    }
    path = out / "run_meta.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(path)

    path = out / "shock_path.csv"
    _write_csv(path, ["step", "t", "x_sc", "rh_speed", "shock_height"],
               ((s.step, s.t, s.x_sc, s.rh_speed, s.shock_height) for s in record.steps))
    written.append(path)

    for k, st in enumerate(record.snapshots):
        path = out / f"snapshots_{k:03d}.csv"
        _write_csv(path, ["t", "x", "u"],
                   ((st.t, x, u) for x, u in _snapshot_rows(st, record.config.snapshot_points)))
        written.append(path)

    if record.spatial:
        l = range(p + 1)
        header = (["step", "t", "boundary_x"] + [f"M{k}" for k in l] + [f"D{k}" for k in l]
                  + [f"logJ{k}" for k in l])

        def rows():
            for ind in record.spatial:
                with np.errstate(all="ignore"):
                    lj = jump_orders(ind) if 0.0 < ind.h < 1.0 else np.full_like(ind.J, np.nan)
                for k in range(ind.boundary_x.size):
                    yield ([ind.step, ind.t, ind.boundary_x[k]] + list(ind.M[k]) + list(ind.D[k])
                           + list(lj[k]))
                yield [ind.step, ind.t, ind.x_s] + list(ind.M_s) + [None] * (2 * (p + 1))

        path = out / "indicators.csv"
        _write_csv(path, header, rows())
        written.append(path)

    if record.temporal:
        def trows():
            for ti in record.temporal:
                for order in range(ti.shock.size):
                    yield (ti.step, ti.t, order, ti.shock[order], ti.u_maxnorm[order])

        path = out / "temporal.csv"
        _write_csv(path, ["step", "t", "order", "x_s_deriv", "u_maxnorm"], trows())
        written.append(path)

    path = out / "events.csv"
    _write_csv(path, ["step", "time", "old_i", "new_i", "measured_L1_error", "bound"],
               ((e.step, e.time, e.old_i, e.new_i, e.measured_l1_error, e.bound)
                for e in record.events))
    written.append(path)

    if table is not None:
        written.append(emit_table(table, out))
    return written


def emit_table(table: ConvergenceTable, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"convergence_{table.rule}.csv"
    _write_csv(path, ["h", "tau", "x_sc", "difference", "ratio"],
               ((r.h, r.tau, r.x_sc, d, q)
                for r, d, q in zip(table.rows, table.differences, table.ratios)))
    return path
