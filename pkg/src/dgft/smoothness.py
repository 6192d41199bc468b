"""Numerical smoothness indicators, jump orders and the anti-smoothing detector.

At each regular grid line ``x_{j-1/2}`` the spatial indicator collects the
one-sided derivatives ``M^l`` (right limit) and ``L^l`` (left limit), their
jump ``J^l = M^l - L^l`` and the scaled jump ``D^l = J^l / h^(p+2-l(1+alpha))``.
The temporal indicator collects the time derivatives of the shock position
and the max norms of the time derivatives of the semi-discrete solution.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .polykernel import ModalPoly, gauss_rule, legendre_table, to_reference
from .shockmesh import ShockState

__all__ = [
    "SpatialIndicator",
    "TemporalIndicator",
    "DetectionReport",
    "AntiSmoothingDetector",
    "spatial_indicator",
    "jump_orders",
    "temporal_indicator",
    "detect_anti_smoothing",
    "transition_error_bound",
    "shock_height",
]


@dataclass(frozen=True, eq=False)
class SpatialIndicator:
    step: int
    t: float
    h: float
    p: int
    alpha: float
    boundary_index: np.ndarray   # grid index j of x_{j-1/2}
    boundary_x: np.ndarray
    M: np.ndarray                # (n_boundaries, p+1)
    L: np.ndarray
    J: np.ndarray
    D: np.ndarray
    M_s: np.ndarray              # right limits at the shock
    x_s: float
    shock_cell: int = -1         # index i of the cell holding the shock

    def scale_exponents(self) -> np.ndarray:
        l = np.arange(self.p + 1)
        return self.p + 2 - l * (1.0 + self.alpha)

    def D_by_boundary(self) -> dict[int, np.ndarray]:
        return {int(j): self.D[k] for k, j in enumerate(self.boundary_index)}

    def special_edges(self) -> tuple[int, int]:
        """Grid indices of the outer edges of ``Omega_L`` and ``Omega_R``."""
        return self.shock_cell - 1, self.shock_cell + 2


@dataclass(frozen=True, eq=False)
class TemporalIndicator:
    step: int
    t: float
    shock: np.ndarray        # |d^l x_s / dt^l|, l = 0..k+1
    u_maxnorm: np.ndarray    # max over cells of ||d^l u / dt^l||_inf
    cell_maxnorm: np.ndarray


@dataclass(frozen=True)
class DetectionReport:
    flagged: bool
    boundary_index: int | None = None
    boundary_x: float | None = None
    order: int | None = None
    step: int | None = None
    history: tuple[float, ...] = ()


def spatial_indicator(state: ShockState, inflow_value: float | None = None,
                      alpha: float | None = None, step: int = 0) -> SpatialIndicator:
    """Indicator at ``x_{j-1/2}`` for ``j = 0..i-1`` and ``i+2..m-1``.

    At ``j = 0`` the left limit is the inflow trace; only the value jump is
    reported there, higher ``L``, ``J``, ``D`` entries are NaN.
    """
    mesh = state.mesh
    p = state.p
    h = mesh.h
    if alpha is None:
        alpha = 1.0 / p if p > 0 else 0.0
    w = state.widths()
    C = state.coeffs
    right_lim = _one_sided_cells(C, w, -1.0, p)
    left_lim = _one_sided_cells(C, w, 1.0, p)

    i = mesh.i
    js = np.concatenate([np.arange(0, i), np.arange(i + 2, mesh.m)])
    # the cell to the right of x_{j-1/2} and to its left, in storage slots
    right_slot = np.where(js <= i - 1, js, js - 1)
    left_slot = right_slot - 1

    M = right_lim[right_slot]
    L = np.full_like(M, np.nan)
    L[js > 0] = left_lim[left_slot[js > 0]]
    if js[0] == 0:
        L[0, 0] = np.nan if inflow_value is None else inflow_value
    J = M - L
    l = np.arange(p + 1)
    D = J / h ** (p + 2 - l * (1.0 + alpha))
    M_s = right_lim[mesh.idx_R]
    return SpatialIndicator(step, state.t, h, p, alpha, js, mesh.grid(js).astype(float),
                            M, L, J, D, M_s, mesh.x_sc, i)


def _one_sided_cells(C: np.ndarray, w: np.ndarray, side: float, p: int) -> np.ndarray:
    out = np.empty(C.shape)
    for l in range(p + 1):
        tab = legendre_table(p, np.array([side]), l)[:, 0]
        out[:, l] = (C @ tab) * (2.0 / w) ** l
    return out


def jump_orders(ind: SpatialIndicator, h: float | None = None) -> np.ndarray:
    """``log_h |J^l|`` per boundary; ``+inf`` marks an exactly zero jump, NaN a missing one."""
    h = ind.h if h is None else h
    if not 0.0 < h < 1.0:
        raise ValueError(f"log base h must lie in (0, 1), got {h}")
    absJ = np.abs(ind.J)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(absJ) / math.log(h)
    out[absJ == 0.0] = np.inf
    return out


def temporal_indicator(scheme, state: ShockState, max_order: int = 4, step: int = 0,
                       neglect_shock_correction: bool = False) -> TemporalIndicator:
    """Package :meth:`SemiDiscreteScheme.temporal_derivatives` as magnitudes."""
    td = scheme.temporal_derivatives(state, max_order,
                                     neglect_shock_correction=neglect_shock_correction)
    return TemporalIndicator(step, state.t, np.abs(td.shock), td.u_maxnorm, td.cell_maxnorm)


def detect_anti_smoothing(history, growth: float = 2.0, persistence: int = 2,
                          floor: float = 1.0) -> DetectionReport:
    """Flag growing, sign-alternating scaled jumps.

    A boundary/order pair is flagged when the last ``persistence`` step-to-step
    comparisons all show ``|D_new| >= growth * |D_old|`` with opposite signs,
    and the newest ``|D|`` is at least ``floor``.  The outer edges of the
    special cells are skipped: a transition rebuilds ``Omega_R`` by projection,
    which changes the jump there in one step without any instability.
    """
    history = list(history)
    if len(history) < persistence + 1:
        return DetectionReport(False)
    window = history[-(persistence + 1):]
    maps = [ind.D_by_boundary() for ind in window]
    common = set(maps[0])
    for mp in maps[1:]:
        common &= set(mp)
    for ind in window:
        common -= set(ind.special_edges())
    newest = window[-1]
    for j in sorted(common):
        seq = np.array([mp[j] for mp in maps])          # (persistence+1, p+1)
        for l in range(seq.shape[1]):
            vals = seq[:, l]
            if not np.all(np.isfinite(vals)) or abs(vals[-1]) < floor:
                continue
            old, new = vals[:-1], vals[1:]
            if np.all(np.abs(new) >= growth * np.abs(old)) and np.all(old * new < 0.0):
                k = int(np.nonzero(newest.boundary_index == j)[0][0])
                return DetectionReport(True, int(j), float(newest.boundary_x[k]), l,
                                       newest.step, tuple(float(v) for v in vals))
    return DetectionReport(False)


@dataclass
class AntiSmoothingDetector:
    """Rolling window of spatial indicators fed once per step."""

    growth: float = 2.0
    persistence: int = 2
    window: int = 3
    floor: float = 1.0
    history: deque = field(default_factory=deque)
    first_flag: DetectionReport | None = None

    def update(self, ind: SpatialIndicator) -> DetectionReport:
        self.history.append(ind)
        while len(self.history) > max(self.window, self.persistence + 1):
            self.history.popleft()
        report = detect_anti_smoothing(self.history, self.growth, self.persistence, self.floor)
        if report.flagged and self.first_flag is None:
            self.first_flag = report
        return report


def transition_error_bound(old_R: ModalPoly, nxt: ModalPoly, h: float) -> tuple[float, float]:
    """Computable bound on the L1 error of merging ``old_R`` and ``nxt`` by projection.

    ``v`` is the Taylor polynomial at the shared grid line built from the
    averaged one-sided derivatives; ``C_hat = ||v - u||_{L2} / h^(p+3/2)`` and
    the bound is ``h^(p+2) sqrt(2) C_hat``.
    """
    p = max(old_R.degree, nxt.degree)
    x0 = old_R.x_hi
    right = _one_sided_cells(nxt.coeffs[None, :], np.array([nxt.width]), -1.0, nxt.degree)[0]
    left = _one_sided_cells(old_R.coeffs[None, :], np.array([old_R.width]), 1.0, old_R.degree)[0]
    avg = 0.5 * (right + left)
    fact = np.array([math.factorial(l) for l in range(avg.size)], dtype=float)

    rule = gauss_rule(p + 2)
    sq = 0.0
    for piece in (old_R, nxt):
        x = piece.x_lo + 0.5 * (rule.nodes + 1.0) * piece.width
        v = np.polynomial.polynomial.polyval(x - x0, avg / fact)
        tab = legendre_table(piece.degree, to_reference(x, piece.x_lo, piece.x_hi))
        u = piece.coeffs @ tab
        sq += 0.5 * piece.width * float(rule.weights @ (v - u) ** 2)
    l2 = math.sqrt(sq)
    c_hat = l2 / h ** (p + 1.5)
    return c_hat, h ** (p + 2) * math.sqrt(2.0) * c_hat


def shock_height(state: ShockState) -> tuple[float, float]:
    """``(u(x_s^-) - u(x_s^+), 3/4 of its magnitude)``."""
    u_m, u_p = state.traces()
    height = u_m - u_p
    return height, 0.75 * abs(height)
