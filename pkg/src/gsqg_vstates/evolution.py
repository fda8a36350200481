"""Contour dynamics in polar form, for checking that V-states rotate rigidly.

The boundary moves by R_t = -(F_1 + F_2 + F_3)(R). A V-state satisfies
sum F_i = Omega R', so it evolves as R(x - Omega t). Time stepping is classical
RK4 on the coefficient vector (base, c, s); the grid is only used to evaluate
the right-hand side.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .contour import RadialContour, coefficients_from_grid, default_grid_points, rotate, values_at
from .functional import Geometry, QuadratureConfig, _sum_Fi
from .special_functions import _as_alpha, omega_k

__all__ = [
    "EvolutionState",
    "RotationReport",
    "TailEnergyError",
    "rhs",
    "rhs_coefficients",
    "rk4_step",
    "area",
    "heuristic_dt",
    "rigid_rotation_error",
]

TAIL_LIMIT = 1e-6
TAIL_FLOOR = 1e-28  # roundoff-level tail energy is never flagged


class TailEnergyError(RuntimeError):
    """Too much energy in the top quarter of the retained modes."""


@dataclass(frozen=True)
class EvolutionState:
    time: float
    contour: RadialContour


def _points(contour: RadialContour, n_points: int | None) -> int:
    # a margin above 4 m n keeps aliasing of the nonlinear terms below roundoff
    return default_grid_points(contour) if n_points is None else n_points


def rhs(contour: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), n_points: int | None = None) -> np.ndarray:
    """R_t = -sum_i F_i(R) on the grid."""
    geo = Geometry(contour, alpha, quad, _points(contour, n_points))
    return -_sum_Fi(geo)


def rhs_coefficients(contour: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), n_points: int | None = None) -> RadialContour:
    """The right-hand side as a coefficient set on the contour's modes."""
    values = rhs(contour, alpha, quad, n_points)
    base, c, s = coefficients_from_grid(values, contour.m, contour.n_modes)
    return RadialContour(contour.m, c, s, base)


def area(contour: RadialContour) -> float:
    """Enclosed area, the integral of R^2 / 2 over one turn."""
    return math.pi * contour.base**2 + 0.5 * math.pi * float(
        np.sum(contour.cos**2) + np.sum(contour.sin**2)
    )


def _check_tail(contour: RadialContour) -> None:
    e = contour.cos**2 + contour.sin**2
    total = float(np.sum(e))
    if total == 0.0:
        return
    tail = float(np.sum(e[(3 * e.size) // 4 :]))
    if tail > TAIL_LIMIT * total and tail > TAIL_FLOOR:
        raise TailEnergyError(f"tail energy fraction {tail / total:.3e} exceeds {TAIL_LIMIT:g}")


def rk4_step(state: EvolutionState, dt: float, alpha, quad: QuadratureConfig = QuadratureConfig(), n_points: int | None = None) -> EvolutionState:
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return state
    R = state.contour

    def f(c):
        return rhs_coefficients(c, alpha, quad, n_points)

    k1 = f(R)
    k2 = f(R + k1.scaled(dt / 2))
    k3 = f(R + k2.scaled(dt / 2))
    k4 = f(R + k3.scaled(dt))
    incr = (k1 + k2.scaled(2.0) + k3.scaled(2.0) + k4).scaled(dt / 6)
    new = R + incr
    _check_tail(new)
    return EvolutionState(state.time + dt, new)


def heuristic_dt(alpha, m: int, n_modes: int) -> float:
    """0.1 / (n_modes m |Omega_m|), or 0.1 / (n_modes m) when Omega_m = 0."""
    scale = abs(omega_k(alpha, m)) or 1.0
    return 0.1 / (n_modes * m * scale)


@dataclass(frozen=True)
class RotationReport:
    max_error: float
    area_drift: float
    checkpoints: tuple  # ((t, error, area), ...)
    steps: int
    dt: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,max_error,area\n")
        for t, e, a in self.checkpoints:
            buf.write(f"{t:.17g},{e:.17g},{a:.17g}\n")
        return buf.getvalue()


def _sup_diff(a: RadialContour, b: RadialContour) -> float:
    d = RadialContour(a.m, a.cos - b.cos, a.sin - b.sin, a.base - b.base)
    x = 2.0 * np.pi * np.arange(8 * a.m * a.n_modes) / (8 * a.m * a.n_modes)
    return float(np.max(np.abs(values_at(d, x))))


def rigid_rotation_error(point, t_final: float, dt: float | None = None, *, n_modes: int | None = 12, quad: QuadratureConfig = QuadratureConfig(1024), n_points: int | None = None, n_checkpoints: int = 20) -> RotationReport:
    """Evolve a branch point and compare with the rigidly rotated profile.

    The contour is truncated to ``n_modes`` (None keeps all) before evolving;
    the reference is the rotation of the same truncated contour.
    """
    alpha = _as_alpha(point.alpha)
    R0 = point.contour if n_modes is None else point.contour.truncated(n_modes)
    omega = point.omega
    if dt is None:
        dt = heuristic_dt(alpha, point.m, R0.n_modes)
    if not dt > 0 or t_final < 0:
        raise ValueError("need dt > 0 and t_final >= 0")
    steps = int(math.ceil(t_final / dt - 1e-12)) if t_final > 0 else 0
    dt_eff = t_final / steps if steps else 0.0
    every = max(1, steps // max(1, n_checkpoints))
    a0 = area(R0)
    state = EvolutionState(0.0, R0)
    checkpoints = [(0.0, 0.0, a0)]
    max_err, drift = 0.0, 0.0
    for i in range(1, steps + 1):
        state = rk4_step(state, dt_eff, alpha, quad, n_points)
        if i % every == 0 or i == steps:
            t = i * dt_eff
            err = _sup_diff(state.contour, rotate(R0, omega * t))
            a = area(state.contour)
            max_err = max(max_err, err)
            drift = max(drift, abs(a - a0) / a0)
            checkpoints.append((t, err, a))
    return RotationReport(max_err, drift, tuple(checkpoints), steps, dt_eff)
