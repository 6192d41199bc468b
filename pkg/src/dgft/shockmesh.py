"""Shock-aware partition of ``[a, b]`` and the special-cell transition.

Grid lines are ``x_{j-1/2} = a + j h``.  While the computed shock ``x_sc``
lies in ``[x_{i-1/2}, x_{i+1/2})`` the regular cells ``i-1, i, i+1`` are
replaced by ``Omega_L = (x_{i-3/2}, x_sc)`` and ``Omega_R = (x_sc, x_{i+3/2})``.

Cell storage order in :class:`ShockState` is left to right::

    idx 0 .. i-2      regular cells j = 0 .. i-2
    idx i-1           Omega_L
    idx i             Omega_R
    idx i+1 .. m-2    regular cells j = i+2 .. m-1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import legendre as leg

from .errors import ConfigurationError, FatalStepError, OutflowReached
from .polykernel import ModalPoly, legendre_table, project_merged, reexpand

__all__ = [
    "ShockMesh",
    "ShockState",
    "TransitionEvent",
    "build_initial_mesh",
    "needs_transition",
    "apply_transition",
    "l1_difference",
]


@dataclass(frozen=True)
class ShockMesh:
    a: float
    b: float
    m: int
    i: int
    x_sc: float

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.m

    @property
    def n_cells(self) -> int:
        return self.m - 1

    @property
    def idx_L(self) -> int:
        return self.i - 1

    @property
    def idx_R(self) -> int:
        return self.i

    def grid(self, j) -> float:
        """Grid line ``x_{j-1/2}``."""
        return self.a + j * self.h

    def edges(self) -> np.ndarray:
        """Cell boundaries in storage order (``m`` values for ``m - 1`` cells)."""
        j = np.arange(self.m + 1)
        g = self.a + j * self.h
        g[-1] = self.b
        return np.concatenate([g[: self.i], [self.x_sc], g[self.i + 2:]])

    def cell_grid_index(self, idx: int) -> int | str:
        """Regular-cell index ``j`` of storage slot ``idx``, or ``"L"`` / ``"R"``."""
        if idx < self.i - 1:
            return idx
        if idx == self.i - 1:
            return "L"
        if idx == self.i:
            return "R"
        return idx + 1

    def storage_index(self, j: int) -> int:
        """Storage slot of regular cell ``j``."""
        if 0 <= j <= self.i - 2:
            return j
        if self.i + 2 <= j <= self.m - 1:
            return j - 1
        raise IndexError(f"cell {j} is not a regular cell (shock cell i={self.i})")

    def with_shock(self, x_sc: float) -> ShockMesh:
        return replace(self, x_sc=float(x_sc))


@dataclass(frozen=True, eq=False)
class ShockState:
    """Shock position plus modal coefficients of every cell; the ODE unknown ``W``."""

    mesh: ShockMesh
    coeffs: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != self.mesh.n_cells:
            raise ValueError(
                f"coefficient array of shape {c.shape} does not match "
                f"{self.mesh.n_cells} cells")
        object.__setattr__(self, "coeffs", c)

    @property
    def x_s(self) -> float:
        return self.mesh.x_sc

    @property
    def p(self) -> int:
        return self.coeffs.shape[1] - 1

    def edges(self) -> np.ndarray:
        return self.mesh.edges()

    def widths(self) -> np.ndarray:
        return np.diff(self.mesh.edges())

    def cell_poly(self, idx: int) -> ModalPoly:
        e = self.mesh.edges()
        return ModalPoly(e[idx], e[idx + 1], self.coeffs[idx])

    def polys(self) -> list[ModalPoly]:
        e = self.mesh.edges()
        return [ModalPoly(e[k], e[k + 1], self.coeffs[k]) for k in range(e.size - 1)]

    def traces(self) -> tuple[float, float]:
        """``(u(x_s^-), u(x_s^+))``."""
        cL = self.coeffs[self.mesh.idx_L]
        cR = self.coeffs[self.mesh.idx_R]
        sgn = (-1.0) ** np.arange(cR.size)
        return float(cL.sum()), float(cR @ sgn)

    def total_mass(self) -> float:
        return float(self.widths() @ self.coeffs[:, 0])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.mesh.x_sc], self.coeffs.ravel()])

    def from_vector(self, vec: np.ndarray, t: float | None = None) -> ShockState:
        vec = np.asarray(vec, dtype=float)
        return ShockState(self.mesh.with_shock(vec[0]),
                          vec[1:].reshape(self.coeffs.shape),
                          self.t if t is None else t)

    def replace(self, **kw) -> ShockState:
        return replace(self, **kw)

    def evaluate(self, x, side: str = "right") -> np.ndarray:
        """Pointwise values; at a cell boundary ``side`` selects the one-sided limit."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        e = self.mesh.edges()
        if side == "right":
            idx = np.searchsorted(e, x, side="right") - 1
        else:
            idx = np.searchsorted(e, x, side="left") - 1
        idx = np.clip(idx, 0, e.size - 2)
        lo, hi = e[idx], e[idx + 1]
        xi = 2.0 * (x - lo) / (hi - lo) - 1.0
        tab = legendre_table(self.p, xi)
        return np.einsum("nk,kn->n", self.coeffs[idx], tab)


@dataclass(frozen=True)
class TransitionEvent:
    step: int
    time: float
    old_i: int
    new_i: int
    measured_l1_error: float
    c_hat: float
    bound: float


def build_initial_mesh(a: float, b: float, m: int, x_s0: float) -> ShockMesh:
    """Uniform mesh with shock cell ``i`` such that ``x_s0`` is in ``[x_{i-1/2}, x_{i+1/2})``."""
    if m < 6:
        raise ConfigurationError(f"need at least 6 cells, got m={m}")
    if not a < x_s0 < b:
        raise ConfigurationError(f"shock position {x_s0} not inside ({a}, {b})")
    h = (b - a) / m
    i = math.floor((x_s0 - a) / h)
    # guard the floor against rounding right at a grid line
    if a + (i + 1) * h <= x_s0:
        i += 1
    elif a + i * h > x_s0:
        i -= 1
    if not 2 <= i <= m - 3:
        raise ConfigurationError(
            f"shock at {x_s0} falls in cell i={i}; need 2 <= i <= m-3={m - 3} so "
            "that both special cells and their neighbours fit in the domain")
    return ShockMesh(float(a), float(b), int(m), int(i), float(x_s0))


def needs_transition(mesh: ShockMesh, x_new: float) -> bool:
    """True when the new shock position reached ``x_{i+1/2}``."""
    if x_new < mesh.x_sc:
        raise FatalStepError(
            f"shock moved upwind from {mesh.x_sc:.17g} to {x_new:.17g}")
    if x_new >= mesh.grid(mesh.i + 2):
        raise FatalStepError(
            f"shock at {x_new:.17g} passed x_(i+3/2)={mesh.grid(mesh.i + 2):.17g} "
            "in one step; the time step is too large")
    return x_new >= mesh.grid(mesh.i + 1)


def _pieces_l1(diff_pieces: list[tuple[np.ndarray, float]]) -> float:
    """Exact L1 norm of a piecewise polynomial given as Legendre coefficients and widths."""
    total = 0.0
    for c, width in diff_pieces:
        c = np.trim_zeros(np.asarray(c, dtype=float), "b")
        if c.size == 0:
            continue
        roots = leg.legroots(c) if c.size > 1 else np.array([])
        roots = np.sort(roots[np.isreal(roots)].real) if roots.size else roots
        pts = np.concatenate([[-1.0], roots[(roots > -1.0) & (roots < 1.0)], [1.0]])
        anti = leg.legint(c)
        vals = leg.legval(pts, anti)
        total += 0.5 * width * float(np.sum(np.abs(np.diff(vals))))
    return total


def l1_difference(a: ModalPoly, b: ModalPoly) -> float:
    """Exact ``||a - b||_{L1}`` over ``a``'s interval (``b`` is re-expanded onto it)."""
    bb = reexpand(b, (a.x_lo, a.x_hi))
    return _pieces_l1([(a.coeffs - bb.coeffs, a.width)])


def apply_transition(state: ShockState, step: int = -1) -> tuple[ShockState, TransitionEvent]:
    """Rebuild the special cells after the shock crossed ``x_{i+1/2}``.

    The old ``Omega_L`` is split exactly into ``Omega_{i-1}`` and the new
    ``Omega_L``; the old ``Omega_R`` and ``Omega_{i+2}`` are merged into the
    new ``Omega_R`` by L2 projection.  Every other cell is untouched.
    """
    from .smoothness import transition_error_bound

    mesh = state.mesh
    if not needs_transition(mesh, mesh.x_sc):
        raise ValueError("no transition pending: shock still inside its cell")
    if mesh.i + 1 > mesh.m - 3:
        raise OutflowReached(
            f"shock at {mesh.x_sc:.17g} needs cell index {mesh.i + 1} > m-3={mesh.m - 3}")
    i, x_s = mesh.i, mesh.x_sc
    old_L = state.cell_poly(mesh.idx_L)
    old_R = state.cell_poly(mesh.idx_R)
    nxt = state.cell_poly(mesh.idx_R + 1)

    regular = reexpand(old_L, (mesh.grid(i - 1), mesh.grid(i)))
    new_L = reexpand(old_L, (mesh.grid(i), x_s))
    new_R = project_merged(old_R, nxt, (x_s, mesh.grid(i + 3)))

    measured = (_pieces_l1([(reexpand(new_R, (old_R.x_lo, old_R.x_hi)).coeffs - old_R.coeffs,
                             old_R.width)])
                + _pieces_l1([(reexpand(new_R, (nxt.x_lo, nxt.x_hi)).coeffs - nxt.coeffs,
                               nxt.width)]))
    c_hat, bound = transition_error_bound(old_R, nxt, mesh.h)

    k = mesh.idx_L
    coeffs = np.concatenate([
        state.coeffs[:k],
        regular.coeffs[None, :],
        new_L.coeffs[None, :],
        new_R.coeffs[None, :],
        state.coeffs[k + 3:],
    ])
    new_mesh = replace(mesh, i=i + 1)
    event = TransitionEvent(step, state.t, i, i + 1, measured, c_hat, bound)
    return ShockState(new_mesh, coeffs, state.t), event
