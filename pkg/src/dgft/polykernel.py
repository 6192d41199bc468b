"""Modal Legendre polynomials on arbitrary intervals.

A cell polynomial is stored by its coefficients in the Legendre basis
``P_k(xi)`` with ``xi = 2 (x - x_lo) / (x_hi - x_lo) - 1``.  The basis is
orthogonal, so the mass matrix on a cell of width ``w`` is
``diag(w / (2k + 1))`` and no linear solves are needed anywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError

__all__ = [
    "ModalPoly",
    "QuadratureRule",
    "legendre_eval",
    "legendre_table",
    "gauss_rule",
    "eval_poly",
    "integrate_poly",
    "project_function",
    "reexpand",
    "reexpand_matrix",
    "project_merged",
    "to_reference",
]


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def q(self) -> int:
        return self.nodes.size

    @property
    def exact_degree(self) -> int:
        return 2 * self.q - 1


@dataclass(frozen=True, eq=False)
class ModalPoly:
    x_lo: float
    x_hi: float
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if not self.x_hi > self.x_lo:
            raise ValueError(f"degenerate interval [{self.x_lo}, {self.x_hi}]")
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    def __call__(self, x, deriv_order: int = 0):
        return eval_poly(self, x, deriv_order)


def legendre_table(pmax: int, xi, deriv_order: int = 0) -> np.ndarray:
    """Values of ``d^r P_k / dxi^r`` for ``k = 0..pmax``; shape ``(pmax+1,) + xi.shape``.

    Uses the three-term recurrence for the values and
    ``P_{k+1}^{(r)} = P_{k-1}^{(r)} + (2k+1) P_k^{(r-1)}`` for derivatives.
    """
    xi = np.asarray(xi, dtype=float)
    tab = np.empty((pmax + 1,) + xi.shape)
    tab[0] = 1.0
    if pmax >= 1:
        tab[1] = xi
    for k in range(1, pmax):
        tab[k + 1] = ((2 * k + 1) * xi * tab[k] - k * tab[k - 1]) / (k + 1)
    for _ in range(deriv_order):
        prev = tab
        tab = np.zeros_like(prev)
        if pmax >= 1:
            tab[1] = prev[0]
        for k in range(1, pmax):
            tab[k + 1] = tab[k - 1] + (2 * k + 1) * prev[k]
    return tab


def legendre_eval(degree: int, xi, deriv_order: int = 0):
    """``d^deriv_order P_degree / dxi^deriv_order`` evaluated at ``xi``."""
    if degree < 0 or deriv_order < 0:
        raise ValueError("degree and deriv_order must be nonnegative")
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(np.abs(xi_arr) > 1.0 + 1e-14):
        raise DomainError("reference coordinate outside [-1, 1]")
    out = legendre_table(degree, xi_arr, deriv_order)[degree]
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def _gauss(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_rule(q: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``q`` nodes on ``[-1, 1]``, nodes ascending."""
    if not 1 <= q <= 32:
        raise ValueError(f"node count must be in 1..32, got {q}")
    x, w = _gauss(int(q))
    return QuadratureRule(x, w)


def to_reference(x, x_lo: float, x_hi: float):
    return 2.0 * (np.asarray(x, dtype=float) - x_lo) / (x_hi - x_lo) - 1.0


def _eval_unchecked(coeffs: np.ndarray, x_lo: float, x_hi: float, x, deriv_order: int = 0):
    xi = to_reference(x, x_lo, x_hi)
    tab = legendre_table(coeffs.size - 1, xi, deriv_order)
    val = np.tensordot(coeffs, tab, axes=(0, 0))
    if deriv_order:
        val = val * (2.0 / (x_hi - x_lo)) ** deriv_order
    return val


def eval_poly(poly: ModalPoly, x, deriv_order: int = 0):
    """Spatial derivative of order ``deriv_order`` at ``x`` (endpoints give one-sided limits)."""
    if deriv_order < 0:
        raise ValueError("deriv_order must be nonnegative")
    x_arr = np.asarray(x, dtype=float)
    tol = 1e-12 * max(1.0, abs(poly.x_lo), abs(poly.x_hi))
    if np.any(x_arr < poly.x_lo - tol) or np.any(x_arr > poly.x_hi + tol):
        raise DomainError(f"x outside [{poly.x_lo}, {poly.x_hi}]")
    val = _eval_unchecked(poly.coeffs, poly.x_lo, poly.x_hi, x_arr, deriv_order)
    return float(val) if np.ndim(val) == 0 else val


def integrate_poly(poly: ModalPoly) -> float:
    return float(poly.width * poly.coeffs[0])


def project_function(g: Callable, interval: tuple[float, float], p: int,
                     rule: QuadratureRule | None = None) -> ModalPoly:
    """L2 projection of a pointwise function onto degree-``p`` polynomials."""
    x_lo, x_hi = float(interval[0]), float(interval[1])
    if rule is None:
        rule = gauss_rule(p + 3)
    elif rule.exact_degree < 2 * p:
        warnings.warn(f"{rule.q}-point rule is not exact to degree {2 * p}",
                      stacklevel=2)
    x = x_lo + 0.5 * (rule.nodes + 1.0) * (x_hi - x_lo)
    gx = np.asarray(g(x), dtype=float) * np.ones_like(x)
    tab = legendre_table(p, rule.nodes)
    k = np.arange(p + 1)
    coeffs = (2 * k + 1) / 2.0 * (tab @ (rule.weights * gx))
    return ModalPoly(x_lo, x_hi, coeffs)


def reexpand(poly: ModalPoly, new_interval: tuple[float, float]) -> ModalPoly:
    """Represent the same polynomial function in the basis of ``new_interval``.

    The new interval may extend beyond the old support; the polynomial is
    continued analytically.  Exact up to rounding since ``p + 1`` Gauss nodes
    integrate degree ``2p`` products exactly.
    """
    x_lo, x_hi = float(new_interval[0]), float(new_interval[1])
    if not x_hi > x_lo:
        raise ValueError(f"degenerate interval [{x_lo}, {x_hi}]")
    p = poly.degree
    rule = gauss_rule(p + 1)
    x = x_lo + 0.5 * (rule.nodes + 1.0) * (x_hi - x_lo)
    vals = _eval_unchecked(poly.coeffs, poly.x_lo, poly.x_hi, x)
    tab = legendre_table(p, rule.nodes)
    k = np.arange(p + 1)
    return ModalPoly(x_lo, x_hi, (2 * k + 1) / 2.0 * (tab @ (rule.weights * vals)))


def reexpand_matrix(p: int, old: tuple[float, float], new: tuple[float, float]) -> np.ndarray:
    """Matrix ``R`` with ``c_new = R @ c_old`` for degree-``p`` polynomials."""
    rule = gauss_rule(p + 1)
    x = new[0] + 0.5 * (rule.nodes + 1.0) * (new[1] - new[0])
    old_tab = legendre_table(p, to_reference(x, old[0], old[1]))
    k = np.arange(p + 1)
    return ((2 * k + 1) / 2.0)[:, None] * (legendre_table(p, rule.nodes) * rule.weights) @ old_tab.T


def project_merged(left: ModalPoly, right: ModalPoly,
                   merged_interval: tuple[float, float] | None = None,
                   p: int | None = None) -> ModalPoly:
    """L2 projection of the two-piece function ``left | right`` onto one interval.

    Each piece is integrated with its own Gauss rule, so the projection is
    exact and mass conservative.
    """
    tol = 1e-12 * max(1.0, abs(left.x_hi))
    if abs(left.x_hi - right.x_lo) > tol:
        raise ValueError(
            f"pieces do not abut: left ends at {left.x_hi}, right starts at {right.x_lo}")
    if merged_interval is None:
        merged_interval = (left.x_lo, right.x_hi)
    x_lo, x_hi = float(merged_interval[0]), float(merged_interval[1])
    if abs(x_lo - left.x_lo) > tol or abs(x_hi - right.x_hi) > tol:
        raise ValueError("merged interval is not the union of the two pieces")
    if p is None:
        p = max(left.degree, right.degree)
    rule = gauss_rule(max(left.degree, right.degree) + p // 2 + 2)
    k = np.arange(p + 1)
    acc = np.zeros(p + 1)
    for piece in (left, right):
        x = piece.x_lo + 0.5 * (rule.nodes + 1.0) * piece.width
        vals = _eval_unchecked(piece.coeffs, piece.x_lo, piece.x_hi, x)
        tab = legendre_table(p, to_reference(x, x_lo, x_hi))
        acc += 0.5 * piece.width * (tab @ (rule.weights * vals))
    return ModalPoly(x_lo, x_hi, (2 * k + 1) / (x_hi - x_lo) * acc)
