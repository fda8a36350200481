"""The V-state functional F(Omega, R) = Omega R' - (F_1 + F_2 + F_3).

Every integral has the form

    int_0^{2pi} |2 sin(u/2)|^(-alpha) g(x, u) du,      u = x - y,

where g is smooth and 2pi-periodic in u and vanishes at u = 0. Writing
D = (R(x) - R(y))^2 + 4 R(x) R(y) sin^2(u/2) = 4 sin^2(u/2) Q with

    Q = ((R(x) - R(x-u)) / (2 sin(u/2)))^2 + R(x) R(x-u)  >  0,

the kernel D^(-alpha/2) splits into the singular weight and the smooth factor
Q^(-alpha/2). The weight acts on a Fourier mode e^{iju} with g(0) = 0 as
-2^(-alpha) lambda_|j|, so the integral is a fixed linear functional of the
samples of g at the midpoint nodes u_q = 2 pi (q + 1/2) / N. The nodes never
touch u = 0.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .contour import (
    NotStarShapedError,
    RadialContour,
    default_grid_points,
    grid,
    min_grid_points,
)
from .special_functions import _as_alpha, c_alpha, lambda_k

__all__ = [
    "FULL_SPLIT",
    "MIDPOINT_ONLY",
    "QuadratureConfig",
    "SineSeries",
    "SymmetryError",
    "RefinementError",
    "quadrature_nodes",
    "singular_weights",
    "singular_multiplier_apply",
    "eval_Fi",
    "eval_F_grid",
    "eval_F_sine",
    "sine_project",
]

FULL_SPLIT = "full_split"
MIDPOINT_ONLY = "midpoint_only"
ALPHA_ACCURATE = (0.1, 1.9)
SYMMETRY_TOL = 1e-10
SYMMETRY_FLOOR = 1e-28  # energy, i.e. RMS 1e-14


class SymmetryError(RuntimeError):
    """F of an even m-fold contour has energy outside the odd lattice modes."""


class RefinementError(RuntimeError):
    """Doubling the quadrature nodes moved the result beyond tolerance."""


@dataclass(frozen=True)
class QuadratureConfig:
    n_nodes: int = 2048
    splitting: str = FULL_SPLIT
    refinement_check: bool = False
    refinement_tol: float = 1e-8

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 128 or self.n_nodes % 2:
            raise ValueError(f"n_nodes must be an even integer >= 128, got {self.n_nodes!r}")
        if self.splitting not in (FULL_SPLIT, MIDPOINT_ONLY):
            raise ValueError(f"unknown splitting {self.splitting!r}")

    def doubled(self) -> "QuadratureConfig":
        return QuadratureConfig(2 * self.n_nodes, self.splitting, False, self.refinement_tol)


@dataclass(frozen=True, eq=False)
class SineSeries:
    """Coefficients b_j of sin(j m x), j = 1..n_modes."""

    m: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite sine coefficients")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0


def quadrature_nodes(n_nodes: int) -> np.ndarray:
    return 2.0 * np.pi * (np.arange(n_nodes) + 0.5) / n_nodes


def _node_trig(n_nodes: int, j: np.ndarray | int = 1):
    """cos(j u_q), sin(j u_q) with exact angle reduction and mirror symmetry.

    j u_q = pi j (2q + 1) / n_nodes, reduced modulo 2 pi in integers, so the
    values at u and 2 pi - u are exact mirrors of each other.
    """
    j = np.atleast_1d(np.asarray(j, dtype=np.int64))
    q = np.arange(n_nodes // 2, dtype=np.int64)
    idx = np.outer(2 * q + 1, j) % (2 * n_nodes)
    ang = np.pi * idx / n_nodes
    c_half, s_half = np.cos(ang), np.sin(ang)
    c = np.concatenate([c_half, c_half[::-1]])
    s = np.concatenate([s_half, -s_half[::-1]])
    return c, s


def _two_sin_half(n_nodes: int) -> np.ndarray:
    # 2 sin(u_q / 2), positive and mirror-symmetric
    half = 2.0 * np.sin(np.pi * (2 * np.arange(n_nodes // 2) + 1) / (2 * n_nodes))
    return np.concatenate([half, half[::-1]])


@lru_cache(maxsize=32)
def _weights(alpha: float, n_nodes: int, splitting: str) -> np.ndarray:
    if splitting == MIDPOINT_ONLY:
        w = (2.0 * np.pi / n_nodes) * _two_sin_half(n_nodes) ** (-alpha)
    else:
        j = np.arange(1, n_nodes // 2)
        lam = np.array([lambda_k(alpha, int(k)) for k in j])
        # sine part of the Nyquist mode integrates to zero; cos part vanishes on the nodes
        w = -(2.0 ** (1.0 - alpha) / n_nodes) * (_node_trig(n_nodes, j)[0] @ lam)
    w.flags.writeable = False
    return w


def singular_weights(alpha, quad: QuadratureConfig) -> np.ndarray:
    """Node weights for int |2 sin(u/2)|^(-alpha) g(u) du with g(0) = 0."""
    a = _as_alpha(alpha).value
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return _weights(a, quad.n_nodes, quad.splitting)


def singular_multiplier_apply(contour: RadialContour, alpha) -> RadialContour:
    """int (f(x - y) - f(x)) / |sin(y/2)|^alpha dy, mode by mode.

    Each mode of absolute frequency k is multiplied by -lambda_k; the constant
    mode is annihilated. Returns the image as a coefficient set (base 0).
    """
    a = _as_alpha(alpha)
    lam = np.array([lambda_k(a, int(k)) for k in contour.frequencies])
    return RadialContour(contour.m, -lam * contour.cos, -lam * contour.sin, 0.0)


def _check_alpha_range(a: float) -> None:
    lo, hi = ALPHA_ACCURATE
    if not lo <= a <= hi:
        warnings.warn(
            f"alpha={a} is outside [{lo}, {hi}]; fixed-node quadrature accuracy is not guaranteed",
            RuntimeWarning,
            stacklevel=4,
        )


def _grid_trig(n_points: int, k: np.ndarray):
    # cos/sin(k x_i) on x_i = 2 pi i / n_points, angle reduced in integers
    idx = np.outer(np.arange(n_points, dtype=np.int64), np.asarray(k, dtype=np.int64)) % n_points
    ang = 2.0 * np.pi * idx / n_points
    return np.cos(ang), np.sin(ang)


def _shifted(cx, sx, cu, su, c, s):
    # sum_k c_k cos(k(x-u)) + s_k sin(k(x-u)) on the (x, u) product grid
    return (cx * c + sx * s) @ cu.T + (sx * c - cx * s) @ su.T


class Geometry:
    """Everything F and its derivative need on the (x_i, u_q) product grid.

    Attributes with a trailing ``b`` are evaluated at x - u.
    """

    def __init__(self, contour: RadialContour, alpha, quad: QuadratureConfig, n_points: int | None = None):
        a = _as_alpha(alpha).value
        _check_alpha_range(a)
        if n_points is None:
            n_points = default_grid_points(contour)
        if n_points < min_grid_points(contour):
            raise ValueError(
                f"n_points={n_points} below the anti-aliasing minimum {min_grid_points(contour)}"
            )
        self.contour = contour
        self.alpha = a
        self.quad = quad
        self.C = c_alpha(a)
        self.x = grid(n_points)
        self.u = quadrature_nodes(quad.n_nodes)
        self.w = singular_weights(a, quad)
        cos_u, sin_u = _node_trig(quad.n_nodes)
        self.cos_u, self.sin_u = cos_u[:, 0], sin_u[:, 0]
        self.two_s = _two_sin_half(quad.n_nodes)

        k = contour.frequencies.astype(float)
        cx, sx = _grid_trig(n_points, contour.frequencies)
        cu, su = _node_trig(quad.n_nodes, contour.frequencies)
        self._tables = (cx, sx, cu, su, k)
        c, s = contour.cos, contour.sin
        self.R = contour.base + cx @ c + sx @ s
        self.P = sx @ (-k * c) + cx @ (k * s)
        self.Rb = contour.base + _shifted(cx, sx, cu, su, c, s)
        self.Pb = _shifted(cx, sx, cu, su, k * s, -k * c)
        if self.R.min() <= 0.0 or self.Rb.min() <= 0.0:
            raise NotStarShapedError("R(x) <= 0 on the evaluation grid")

        R = self.R[:, None]
        self.dR = (R - self.Rb) / self.two_s  # smooth difference quotient
        self.Q = self.dR**2 + R * self.Rb
        self.Qa = self.Q ** (-a / 2)

    @property
    def n_points(self) -> int:
        return self.x.size

    def integrate(self, g: np.ndarray) -> np.ndarray:
        """Row-wise sum_q w_q g(x_i, u_q), summed in a fixed order."""
        return np.sum(g * self.w, axis=1)

    # the three smooth integrands (weight |2 sin(u/2)|^(-alpha) excluded)
    def g1(self):
        R, P = self.R[:, None], self.P[:, None]
        return self.sin_u * self.Qa * (R * self.Rb + P * self.Pb)

    def g2(self):
        return self.cos_u * self.Qa * (self.Pb - self.P[:, None])

    def g3(self):
        return self.cos_u * self.Qa * (self.R[:, None] - self.Rb)

    def F1(self):
        return self.C / self.R * self.integrate(self.g1())

    def F2(self):
        return self.C * self.integrate(self.g2())

    def I3(self):
        return self.C * self.integrate(self.g3())

    def F3(self):
        return self.P / self.R * self.I3()

    def shifted_values(self, h: RadialContour):
        """h, h' at x and at x - u for a perturbation sharing m and n_modes."""
        cx, sx, cu, su, k = self._tables
        if h.m != self.contour.m or h.n_modes != self.contour.n_modes:
            raise ValueError("perturbation must share m and n_modes with the contour")
        c, s = h.cos, h.sin
        H = h.base + cx @ c + sx @ s
        H1 = sx @ (-k * c) + cx @ (k * s)
        Hb = h.base + _shifted(cx, sx, cu, su, c, s)
        Hb1 = _shifted(cx, sx, cu, su, k * s, -k * c)
        return H, H1, Hb, Hb1


def _sum_Fi(geo: Geometry, which=(1, 2, 3)) -> np.ndarray:
    out = np.zeros(geo.n_points)
    for i in which:
        out += (geo.F1, geo.F2, geo.F3)[i - 1]()
    return out


def _refined(fn, contour, alpha, quad, n_points):
    val = fn(Geometry(contour, alpha, quad, n_points))
    if quad.refinement_check:
        fine = fn(Geometry(contour, alpha, quad.doubled(), n_points))
        diff = float(np.max(np.abs(fine - val)))
        if diff > quad.refinement_tol:
            raise RefinementError(
                f"quadrature with {quad.n_nodes} nodes differs from {2 * quad.n_nodes} nodes by {diff:.3e}"
            )
    return val


def eval_Fi(i: int, contour: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), n_points: int | None = None) -> np.ndarray:
    """F_i(R) at the grid points x_j = 2 pi j / n_points, i in {1, 2, 3}."""
    if i not in (1, 2, 3):
        raise ValueError("i must be 1, 2 or 3")
    return _refined(lambda g: _sum_Fi(g, (i,)), contour, alpha, quad, n_points)


def eval_F_grid(omega: float, contour: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), n_points: int | None = None) -> np.ndarray:
    """Omega R'(x) - sum_i F_i(R)(x) on the grid."""
    return _refined(lambda g: omega * g.P - _sum_Fi(g), contour, alpha, quad, n_points)


def sine_project(values: np.ndarray, m: int, n_modes: int, *, scale: float | None = None) -> SineSeries:
    """Sine coefficients on modes j m, j = 1..n_modes, with a symmetry audit.

    Energy in cosine modes or off-lattice sine modes must stay below
    SYMMETRY_TOL times the energy ``scale`` (default: mean square of
    ``values``) plus an absolute roundoff floor SYMMETRY_FLOOR.
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if m * n_modes >= n / 2:
        raise ValueError("grid too coarse for the requested modes")
    fhat = np.fft.rfft(values) / n
    freqs = np.arange(fhat.size)
    b_all = -2.0 * fhat.imag
    a_all = 2.0 * fhat.real
    a_all[0] = fhat[0].real
    if n % 2 == 0:
        a_all[-1] = fhat[-1].real
        b_all[-1] = 0.0
    lattice = (freqs % m == 0) & (freqs > 0)
    cos_energy = a_all[0] ** 2 + 0.5 * np.sum(a_all[1:] ** 2)
    leak = cos_energy + 0.5 * np.sum(b_all[~lattice] ** 2)
    total = float(np.mean(values**2))
    ref = total if scale is None else max(total, scale)
    if leak > SYMMETRY_TOL * ref + SYMMETRY_FLOOR:
        raise SymmetryError(f"non-lattice/cosine energy {leak:.3e} vs reference {ref:.3e}")
    return SineSeries(m, b_all[m * np.arange(1, n_modes + 1)])


def eval_F_sine(omega: float, contour: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), n_points: int | None = None) -> SineSeries:
    """Sine coefficients of F(Omega, R) for an even contour."""
    if not contour.is_even:
        raise ValueError("eval_F_sine requires an even (cosine-only) contour")

    def parts(g):
        return np.stack([omega * g.P, _sum_Fi(g)])

    p = _refined(parts, contour, alpha, quad, n_points)
    scale = float(np.mean(p[0] ** 2) + np.mean(p[1] ** 2))
    return sine_project(p[0] - p[1], contour.m, contour.n_modes, scale=scale)
