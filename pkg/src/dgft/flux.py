"""Scalar polynomial fluxes for west-wind conservation laws ``u_t + f(u)_x = 0``.

Only fluxes with ``f'(u) > 0`` on the admissible interval are supported, so the
Godunov flux at every cell boundary reduces to the upwind value ``f(u_left)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConfigurationError, DomainError

__all__ = [
    "FluxModel",
    "eval_flux",
    "upwind_flux",
    "max_wave_speed",
    "admissible_interval",
]

# relative slack when testing admissibility, so that traces sitting exactly on
# an interval end are not rejected because of rounding
_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class FluxModel:
    """Polynomial flux ``f(u) = sum_k coeffs[k] u**k`` on ``[u_min, u_max]``."""

    coeffs: tuple[float, ...]
    u_min: float
    u_max: float
    name: str = "polynomial"
    # derivative coefficient tables for orders 0..3
    _tables: tuple[np.ndarray, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.u_max > self.u_min:
            raise ConfigurationError(
                f"empty admissible interval [{self.u_min}, {self.u_max}]")
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=float), "b")
        if c.size == 0:
            c = np.zeros(1)
        tables = [c]
        for _ in range(3):
            tables.append(npoly.polyder(tables[-1]) if tables[-1].size > 1
                          else np.zeros(1))
        object.__setattr__(self, "_tables", tuple(tables))

        lo, speed = _min_on_interval(tables[1], tables[2], self.u_min, self.u_max)
        if speed <= 0.0:
            raise ConfigurationError(
                f"flux is not west-wind: f'({lo:.6g}) = {speed:.6g} <= 0 "
                f"on [{self.u_min:.6g}, {self.u_max:.6g}]")

    @classmethod
    def burgers(cls, u_min: float, u_max: float) -> FluxModel:
        return cls((0.0, 0.0, 0.5), u_min, u_max, name="burgers")

    @classmethod
    def from_spec(cls, spec: Any, u_min: float, u_max: float) -> FluxModel:
        """Build a flux from ``"burgers"`` or an ascending coefficient list."""
        if isinstance(spec, str):
            if spec.lower() != "burgers":
                raise ConfigurationError(f"unknown flux name {spec!r}")
            return cls.burgers(u_min, u_max)
        try:
            coeffs = tuple(float(c) for c in spec)
        except TypeError as exc:
            raise ConfigurationError(f"invalid flux spec {spec!r}") from exc
        return cls(coeffs, u_min, u_max)

    @property
    def degree(self) -> int:
        return self._tables[0].size - 1

    def __call__(self, u, order: int = 0):
        """Unchecked vectorized evaluation of ``d^order f / du^order``."""
        return npoly.polyval(u, self._tables[order])

    def check_admissible(self, u, what: str = "value") -> None:
        u = np.asarray(u, dtype=float)
        slack = _RANGE_SLACK * max(1.0, abs(self.u_min), abs(self.u_max))
        if not np.all(np.isfinite(u)):
            raise DomainError(f"non-finite {what}")
        lo, hi = float(np.min(u)), float(np.max(u))
        if lo < self.u_min - slack or hi > self.u_max + slack:
            bad = lo if lo < self.u_min - slack else hi
            raise DomainError(
                f"{what} {bad:.17g} outside admissible interval "
                f"[{self.u_min:.17g}, {self.u_max:.17g}]")


def _min_on_interval(df: np.ndarray, d2f: np.ndarray, lo: float, hi: float):
    cands = [lo, hi]
    if d2f.size > 1 and np.any(d2f != 0.0):
        for r in npoly.polyroots(d2f):
            if abs(r.imag) < 1e-12 and lo < r.real < hi:
                cands.append(r.real)
    vals = npoly.polyval(np.array(cands), df)
    k = int(np.argmin(vals))
    return cands[k], float(vals[k])


def eval_flux(model: FluxModel, u, order: int = 0):
    """Return ``d^order f / du^order`` at ``u`` after validating the inputs."""
    if order not in (0, 1, 2, 3):
        raise ValueError(f"unsupported derivative order {order}; expected 0..3")
    model.check_admissible(u, "state")
    out = model(u, order)
    return float(out) if np.ndim(out) == 0 else out


def upwind_flux(model: FluxModel, u_left):
    """Godunov flux under west wind: the flux of the left (upwind) trace."""
    return eval_flux(model, u_left, 0)


def max_wave_speed(model: FluxModel, bound: float) -> float:
    """``max f'(w)`` over ``[-bound, bound]`` clipped to the admissible interval."""
    if not bound > 0:
        raise ValueError(f"bound must be positive, got {bound}")
    lo, hi = max(-bound, model.u_min), min(bound, model.u_max)
    if lo > hi:
        raise DomainError(
            f"[-{bound}, {bound}] does not meet admissible interval "
            f"[{model.u_min}, {model.u_max}]")
    cands = [lo, hi]
    d2f = model._tables[2]
    if d2f.size > 1 and np.any(d2f != 0.0):
        for r in npoly.polyroots(d2f):
            if abs(r.imag) < 1e-12 and lo < r.real < hi:
                cands.append(r.real)
    return float(np.max(model(np.array(cands), 1)))


def admissible_interval(values: Sequence[float] | np.ndarray,
                        margin: float = 0.1) -> tuple[float, float]:
    """Data range widened by ``margin`` times its span on both sides."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    span = max(hi - lo, 1e-3 * max(abs(lo), abs(hi), 1.0))
    return lo - margin * span, hi + margin * span
