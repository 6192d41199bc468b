r"""Semi-discrete DG - front tracking operator ``W_t = Psi(W)``.

Regular cells use the upwind DG weak form.  The two special cells have the
shock as a moving boundary.  Their polynomials are stored as
``u(t, x) = sum_k c_k(t) P_k(xi(x, t))`` with ``xi`` the affine map onto the
moving interval, so the coefficient rates are the Eulerian rates ``e_k`` (the
weak form with a fixed test function) plus the frame term

.. math::

    \dot c = e + \Pi\big(u_x \, \partial_t X(\xi, t)\big),

where ``X(xi, t)`` is the inverse map.  For ``Omega_L = (x_f, x_s)``
``X_t = (1 + xi) / 2 * dx_s/dt``, for ``Omega_R = (x_s, x_f)``
``X_t = (1 - xi) / 2 * dx_s/dt``.  Both products have degree ``p`` so the
projection is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateShockError, StateBlowupError
from .flux import FluxModel
from .polykernel import gauss_rule, legendre_table, reexpand_matrix
from .shockmesh import ShockState

__all__ = [
    "Inflow",
    "StateDerivative",
    "SecondDerivative",
    "TemporalDerivatives",
    "SemiDiscreteScheme",
]


@dataclass(frozen=True)
class Inflow:
    """Upwind boundary trace ``u_a(t)`` and its time derivative."""

    value: Callable[[float], float]
    derivative: Callable[[float], float]

    @classmethod
    def constant(cls, u_a: float) -> Inflow:
        u_a = float(u_a)
        return cls(lambda t: u_a, lambda t: 0.0)

    @classmethod
    def from_callable(cls, fn: Callable[[float], float], dt: float = 1e-5) -> Inflow:
        return cls(fn, lambda t: (fn(t + dt) - fn(t - dt)) / (2.0 * dt))


@dataclass(frozen=True, eq=False)
class StateDerivative:
    dx_s: float
    dcoeffs: np.ndarray
    # Eulerian rate u_t at fixed x, in each cell's own basis
    eulerian: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.dx_s], self.dcoeffs.ravel()])


@dataclass(frozen=True, eq=False)
class SecondDerivative:
    ddx_s: float
    ddcoeffs: np.ndarray
    eulerian: np.ndarray

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.ddx_s], self.ddcoeffs.ravel()])


@dataclass(frozen=True, eq=False)
class TemporalDerivatives:
    """``shock[l] = d^l x_s / dt^l`` and ``cell_maxnorm[l, c] = max |d^l u / dt^l|`` on cell ``c``."""

    shock: np.ndarray
    cell_maxnorm: np.ndarray
    coeff_derivs: np.ndarray

    @property
    def max_order(self) -> int:
        return self.shock.size - 1

    @property
    def u_maxnorm(self) -> np.ndarray:
        return self.cell_maxnorm.max(axis=1)


@dataclass
class _Rates:
    uq: np.ndarray
    uR: np.ndarray
    uL: np.ndarray
    widths: np.ndarray
    eulerian: np.ndarray
    speed: float
    height: float


class SemiDiscreteScheme:
    """The coupled ODE right-hand side for one flux, degree and inflow."""

    def __init__(self, flux: FluxModel, p: int, inflow: Inflow | float,
                 q: int | None = None, height_floor: float = 1e-6,
                 fd_time_fraction: float = 1e-2):
        if p < 0:
            raise ValueError("degree must be nonnegative")
        self.flux = flux
        self.p = p
        self.inflow = inflow if isinstance(inflow, Inflow) else Inflow.constant(inflow)
        self.q = q if q is not None else p + 3
        self.height_floor = height_floor
        self.fd_time_fraction = fd_time_fraction

        rule = gauss_rule(self.q)
        self.nodes = rule.nodes
        self.weights = rule.weights
        k = np.arange(p + 1)
        self.scale = (2 * k + 1).astype(float)
        self.sgn = (-1.0) ** k
        self.P = legendre_table(p, rule.nodes)
        self.dP = legendre_table(p, rule.nodes, 1)
        self.ddP = legendre_table(p, rule.nodes, 2)
        # nodal values -> Legendre coefficients
        self.proj = (self.scale / 2.0)[:, None] * self.P * rule.weights
        # nodal flux values -> (f, dP_k/dxi) integrals
        self.vol = self.dP * rule.weights
        # dP_k/dxi at xi = +1 and -1
        self.dP_right = k * (k + 1) / 2.0
        self.dP_left = -self.sgn * k * (k + 1) / 2.0
        # frame velocity profiles X_t / (dx_s/dt) at the nodes
        self.frame_L = (1.0 + rule.nodes) / 2.0
        self.frame_R = (1.0 - rule.nodes) / 2.0

    # ------------------------------------------------------------------
    # first derivative

    def _rates(self, state: ShockState, t: float) -> _Rates:
        C = state.coeffs
        mesh = state.mesh
        iL, iR = mesh.idx_L, mesh.idx_R
        w = np.diff(mesh.edges())
        uq = C @ self.P
        uR = C.sum(axis=1)
        uL = C @ self.sgn
        self._check_states(uq, uR, uL)

        f = self.flux
        fR = f(uR)
        f_in = np.empty_like(fR)
        f_in[0] = f(self.inflow.value(t))
        f_in[1:] = fR[:-1]
        f_in[iR] = f(uL[iR])
        e = (self.scale / w[:, None]) * (
            f(uq) @ self.vol.T + f_in[:, None] * self.sgn - fR[:, None])

        height = uR[iL] - uL[iR]
        if not height > self.height_floor:
            raise DegenerateShockError(
                f"shock height {height:.6g} at x_s={mesh.x_sc:.17g} is below "
                f"the floor {self.height_floor:g}")
        speed = (fR[iL] - f_in[iR]) / height
        return _Rates(uq, uR, uL, w, e, float(speed), float(height))

    def _check_states(self, uq, uR, uL) -> None:
        lo, hi = self.flux.u_min, self.flux.u_max
        for arr in (uq, uR, uL):
            bad = ~((arr >= lo) & (arr <= hi))
            if np.any(bad):
                first = tuple(np.argwhere(bad)[0])
                cell, val = int(first[0]), float(arr[first])
                raise StateBlowupError(
                    f"solution value {val:.6g} in cell slot {cell} left the admissible "
                    f"interval [{lo:.6g}, {hi:.6g}]", cell=cell)

    def _frame_terms(self, C: np.ndarray, w: np.ndarray, iL: int, iR: int, rate: float):
        """Projected ``u_x X_t`` for the two special cells."""
        ux_L = (2.0 / w[iL]) * (C[iL] @ self.dP)
        ux_R = (2.0 / w[iR]) * (C[iR] @ self.dP)
        return (rate * self.frame_L * ux_L) @ self.proj.T, (rate * self.frame_R * ux_R) @ self.proj.T

    def rh_speed(self, state: ShockState) -> float:
        """Rankine-Hugoniot speed of the computed traces at the shock."""
        u_m, u_p = state.traces()
        height = u_m - u_p
        if not height > self.height_floor:
            raise DegenerateShockError(
                f"shock height {height:.6g} is below the floor {self.height_floor:g}")
        f = self.flux
        return float((f(u_m) - f(u_p)) / height)

    def rhs(self, state: ShockState, t: float | None = None) -> StateDerivative:
        t = state.t if t is None else t
        r = self._rates(state, t)
        iL, iR = state.mesh.idx_L, state.mesh.idx_R
        dc = r.eulerian.copy()
        corr_L, corr_R = self._frame_terms(state.coeffs, r.widths, iL, iR, r.speed)
        dc[iL] += corr_L
        dc[iR] += corr_R
        return StateDerivative(r.speed, dc, r.eulerian)

    def psi(self, vec: np.ndarray, template: ShockState, t: float) -> np.ndarray:
        """``Psi`` on the flat vector ``(x_s, coeffs...)`` using ``template``'s mesh layout."""
        return self.rhs(template.from_vector(vec, t), t).to_vector()

    def anchored_psi(self, vec: np.ndarray, anchor: ShockState, t: float) -> np.ndarray:
        """``Psi`` with the special-cell coefficients held in ``anchor``'s cell bases.

        The special-cell polynomials are treated as functions of ``x``: they are
        re-expanded onto the cells induced by ``vec[0]``, their Eulerian rates
        are computed there and mapped back to the anchor bases.  All maps are
        exact, so stage combinations act on the polynomials pointwise in ``x``.
        """
        state = self.from_anchored(vec, anchor, t)
        d = self.rhs(state, t)
        rates = d.eulerian.copy()
        e0, e1 = anchor.edges(), state.edges()
        for k in (anchor.mesh.idx_L, anchor.mesh.idx_R):
            rates[k] = reexpand_matrix(self.p, (e1[k], e1[k + 1]), (e0[k], e0[k + 1])) @ rates[k]
        return np.concatenate([[d.dx_s], rates.ravel()])

    def from_anchored(self, vec: np.ndarray, anchor: ShockState, t: float | None = None
                      ) -> ShockState:
        """Reinterpret an anchored flat vector as a state on its own shock cells."""
        state = anchor.from_vector(vec, t)
        C = state.coeffs.copy()
        e0, e1 = anchor.edges(), state.edges()
        for k in (anchor.mesh.idx_L, anchor.mesh.idx_R):
            C[k] = reexpand_matrix(self.p, (e0[k], e0[k + 1]), (e1[k], e1[k + 1])) @ C[k]
        return state.replace(coeffs=C)

    def rhs_regular(self, state: ShockState, j: int, t: float | None = None) -> np.ndarray:
        """Coefficient rates of regular cell ``j``."""
        return self.rhs(state, t).dcoeffs[state.mesh.storage_index(j)]

    def rhs_special(self, state: ShockState, side: str, t: float | None = None) -> np.ndarray:
        """Coefficient rates of ``Omega_L`` (``side="L"``) or ``Omega_R``."""
        d = self.rhs(state, t).dcoeffs
        if side.upper() == "L":
            return d[state.mesh.idx_L]
        if side.upper() == "R":
            return d[state.mesh.idx_R]
        raise ValueError(f"side must be 'L' or 'R', got {side!r}")

    def mass_rate(self, state: ShockState, deriv: StateDerivative) -> float:
        """``d/dt`` of the total integral, including the moving special-cell widths."""
        w = state.widths()
        iL, iR = state.mesh.idx_L, state.mesh.idx_R
        return float(w @ deriv.dcoeffs[:, 0]
                     + deriv.dx_s * (state.coeffs[iL, 0] - state.coeffs[iR, 0]))

    def boundary_flux_balance(self, state: ShockState, t: float | None = None) -> float:
        """``f(u_a(t)) - f(u(b^-))``."""
        t = state.t if t is None else t
        return float(self.flux(self.inflow.value(t)) - self.flux(state.coeffs[-1].sum()))

    # ------------------------------------------------------------------
    # second derivative

    def second_time_derivative(self, state: ShockState, t: float | None = None,
                               neglect_shock_correction: bool = False) -> SecondDerivative:
        """Analytic ``d^2 x_s/dt^2`` and second coefficient derivatives.

        The Eulerian ``u_tt`` comes from differentiating the weak forms in time;
        the special cells carry the extra ``[u_t + f'(u) u_x] dx_s/dt`` trace
        term, which ``neglect_shock_correction`` drops.
        """
        t = state.t if t is None else t
        f = self.flux
        C = state.coeffs
        mesh = state.mesh
        iL, iR = mesh.idx_L, mesh.idx_R
        r = self._rates(state, t)
        w = r.widths
        s = r.speed
        E = r.eulerian

        utq = E @ self.P
        utR = E.sum(axis=1)
        utL = E @ self.sgn
        g_out = f(r.uR, 1) * utR
        g_in = np.empty_like(g_out)
        u_a = self.inflow.value(t)
        g_in[0] = f(u_a, 1) * self.inflow.derivative(t)
        g_in[1:] = g_out[:-1]
        g_in[iR] = f(r.uL[iR], 1) * utL[iR]
        E2 = (self.scale / w[:, None]) * (
            (f(r.uq, 1) * utq) @ self.vol.T + g_in[:, None] * self.sgn - g_out[:, None])

        u_m, u_p = r.uR[iL], r.uL[iR]
        ux_m = (2.0 / w[iL]) * (C[iL] @ self.dP_right)
        ux_p = (2.0 / w[iR]) * (C[iR] @ self.dP_left)
        ut_m, ut_p = utR[iL], utL[iR]
        if not neglect_shock_correction:
            E2[iL] -= (self.scale / w[iL]) * (ut_m + f(u_m, 1) * ux_m) * s
            E2[iR] += (self.scale / w[iR]) * (ut_p + f(u_p, 1) * ux_p) * s * self.sgn

        d_m = ut_m + ux_m * s
        d_p = ut_p + ux_p * s
        xdd = ((f(u_m, 1) - s) * d_m + (s - f(u_p, 1)) * d_p) / r.height

        # U_tt = u_tt + 2 u_tx X_t + u_xx X_t^2 + u_x X_tt in the moving frame
        ddc = E2.copy()
        for idx, prof in ((iL, self.frame_L), (iR, self.frame_R)):
            jac = 2.0 / w[idx]
            u_tt = E2[idx] @ self.P
            u_tx = jac * (E[idx] @ self.dP)
            u_x = jac * (C[idx] @ self.dP)
            u_xx = jac * jac * (C[idx] @ self.ddP)
            x_t = prof * s
            x_tt = prof * xdd
            ddc[idx] = (u_tt + 2.0 * u_tx * x_t + u_xx * x_t**2 + u_x * x_tt) @ self.proj.T
        return SecondDerivative(float(xdd), ddc, E2)

    # ------------------------------------------------------------------
    # higher derivatives for the temporal indicator

    def fd_time_step(self, state: ShockState) -> float:
        beta = float(np.max(np.abs(self.flux(state.coeffs @ self.P, 1))))
        return self.fd_time_fraction * state.mesh.h / max(beta, 1e-12)

    def coefficient_derivatives(self, state: ShockState, max_order: int = 4,
                                t: float | None = None, delta: float | None = None,
                                neglect_shock_correction: bool = False) -> np.ndarray:
        """Flow derivatives ``d^l W / dt^l`` for ``l = 0..max_order`` as rows of flat vectors.

        Orders 1 and 2 are analytic; orders 3 and 4 are central differences of
        ``Psi`` along the Taylor polynomial of the flow built from the lower orders.
        """
        if not 0 <= max_order <= 4:
            raise ValueError(f"max_order must be in 0..4, got {max_order}")
        t = state.t if t is None else t
        rows = [state.to_vector()]
        if max_order >= 1:
            rows.append(self.rhs(state, t).to_vector())
        if max_order >= 2:
            rows.append(self.second_time_derivative(
                state, t, neglect_shock_correction).to_vector())
        if max_order >= 3:
            d = self.fd_time_step(state) if delta is None else delta

            def g(s: float, nterms: int) -> np.ndarray:
                vec = sum(rows[l] * s**l / math.factorial(l) for l in range(nterms))
                return self.psi(vec, state, t + s)

            rows.append((g(d, 3) - 2.0 * g(0.0, 3) + g(-d, 3)) / d**2)
            if max_order >= 4:
                rows.append((g(2 * d, 4) - 2.0 * g(d, 4) + 2.0 * g(-d, 4) - g(-2 * d, 4))
                            / (2.0 * d**3))
        return np.array(rows)

    def temporal_derivatives(self, state: ShockState, max_order: int = 4,
                             t: float | None = None, n_samples: int | None = None,
                             neglect_shock_correction: bool = False) -> TemporalDerivatives:
        """Shock-position derivatives and per-cell max norms of Eulerian ``d^l u / dt^l``."""
        W = self.coefficient_derivatives(state, max_order, t,
                                         neglect_shock_correction=neglect_shock_correction)
        ncell, npk = state.coeffs.shape
        coeff = W[:, 1:].reshape(W.shape[0], ncell, npk)
        n_samples = n_samples or 4 * (self.p + 1) + 1
        xi0 = np.linspace(-1.0, 1.0, n_samples)
        tab = legendre_table(self.p, xi0)

        # regular cells: xi is frozen, so d^l u/dt^l = sum_k c_k^(l) P_k(xi)
        norms = np.abs(np.einsum("lck,kn->lcn", coeff, tab)).max(axis=2)

        fact = np.array([math.factorial(l) for l in range(W.shape[0])], dtype=float)
        c_jet = coeff / fact[:, None, None]
        d_jet = W[:, 0] / fact
        d_jet = d_jet.copy()
        d_jet[0] = 0.0
        w = state.widths()
        mesh = state.mesh
        for idx, side in ((mesh.idx_L, "L"), (mesh.idx_R, "R")):
            w0 = w[idx]
            if side == "L":
                num = _jet_const((xi0 + 1.0) * w0, d_jet.size)
                den = _jet_add_const(d_jet, w0)
                xi = _jet_mul(num, _jet_recip(np.broadcast_to(den, num.shape))) - _jet_unit(num.shape)
            else:
                num = _jet_const((xi0 + 1.0) * w0, d_jet.size) - 2.0 * d_jet
                den = _jet_add_const(-d_jet, w0)
                xi = _jet_mul(num, _jet_recip(np.broadcast_to(den, num.shape))) - _jet_unit(num.shape)
            u = _jet_legendre_sum(c_jet[:, idx, :], xi)
            norms[:, idx] = np.abs(u * fact).max(axis=0)
        return TemporalDerivatives(W[:, 0].copy(), norms, coeff)


# ----------------------------------------------------------------------
# truncated Taylor series in time; last axis holds the series coefficients


def _jet_const(values: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(np.shape(values) + (n,))
    out[..., 0] = values
    return out


def _jet_unit(shape) -> np.ndarray:
    out = np.zeros(shape)
    out[..., 0] = 1.0
    return out


def _jet_add_const(a: np.ndarray, c: float) -> np.ndarray:
    out = np.array(a, dtype=float)
    out[..., 0] += c
    return out


def _jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape))
    for i in range(n):
        out[..., i:] += a[..., i:i + 1] * b[..., : n - i]
    return out


def _jet_recip(a: np.ndarray) -> np.ndarray:
    n = a.shape[-1]
    out = np.zeros(a.shape)
    out[..., 0] = 1.0 / a[..., 0]
    for k in range(1, n):
        acc = np.zeros(a.shape[:-1])
        for j in range(1, k + 1):
            acc += a[..., j] * out[..., k - j]
        out[..., k] = -acc / a[..., 0]
    return out


def _jet_legendre_sum(c_jet: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """``sum_k c_k(t) P_k(xi(t))``; ``c_jet`` is ``(orders, p+1)``, ``xi`` is ``(npts, orders)``."""
    p = c_jet.shape[1] - 1
    prev = _jet_unit(xi.shape)
    total = np.broadcast_to(c_jet[:, 0], xi.shape).copy()
    if p == 0:
        return total
    cur = xi
    total = total + _jet_mul(cur, np.broadcast_to(c_jet[:, 1], xi.shape))
    for k in range(1, p):
        nxt = ((2 * k + 1) * _jet_mul(xi, cur) - k * prev) / (k + 1)
        prev, cur = cur, nxt
        total = total + _jet_mul(cur, np.broadcast_to(c_jet[:, k + 1], xi.shape))
    return total
