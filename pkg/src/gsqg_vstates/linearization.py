"""Gateaux derivative of F in R, the Jacobian on the m-fold cosine basis.

Differentiating Q^(-alpha/2) in the direction h gives

    dQ = 2 dR dH + h(x) R(x-u) + h(x-u) R(x),    dH = (h(x) - h(x-u)) / (2 sin(u/2)),

so the derivative of every F_i is a sum of five channels, each with a smooth
kernel: h(x), h'(x), h(x-u), h'(x-u) and dH. Kernels are built once per
contour and contracted with any direction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contour import RadialContour, values_at
from .functional import (
    Geometry,
    QuadratureConfig,
    _node_trig,
    _grid_trig,
    eval_F_grid,
)

__all__ = [
    "JacobianMatrix",
    "LinearKernels",
    "gateaux",
    "fd_gateaux",
    "d_omega",
    "assemble_jacobian",
    "cos_basis",
]


class LinearKernels:
    """Channel kernels of h -> sum_i D_i[R] h on a fixed geometry.

    ``a_H``, ``a_H1`` multiply h(x), h'(x); ``k_Hb``, ``k_Hb1``, ``k_D`` are
    (n_points, n_nodes) arrays with the quadrature weights folded in.
    """

    def __init__(self, geo: Geometry):
        self.geo = geo
        a, C, w = geo.alpha, geo.C, geo.w
        R, P = geo.R[:, None], geo.P[:, None]
        Rb, Pb, Qa = geo.Rb, geo.Pb, geo.Qa
        sin_u, cos_u = geo.sin_u, geo.cos_u
        Z = (-0.5 * a) * Qa / geo.Q  # d(Q^(-a/2))/dQ

        f1, f2, f3 = C / R, C, C * P / R
        # coefficient of dQ, summed over the three integrals
        T = Z * (f1 * sin_u * (R * Rb + P * Pb) + f2 * cos_u * (Pb - P) + f3 * cos_u * (R - Rb))
        sQ, cQ = sin_u * Qa, cos_u * Qa

        self.k_D = w * (2.0 * geo.dR * T)
        self.k_Hb = w * (R * T + f1 * sQ * R - f3 * cQ)
        self.k_Hb1 = w * (f1 * sQ * P + f2 * cQ)
        k_H = w * (Rb * T + f1 * sQ * Rb + f3 * cQ)
        k_H1 = w * (f1 * sQ * Pb - f2 * cQ)

        F1 = geo.F1()
        I3 = geo.I3()
        self.a_H = np.sum(k_H, axis=1) - F1 / geo.R - geo.P * I3 / geo.R**2
        self.a_H1 = np.sum(k_H1, axis=1) + I3 / geo.R

    def apply(self, h: RadialContour) -> np.ndarray:
        """sum_i D_i[R] h on the grid, for an arbitrary direction h."""
        H, H1, Hb, Hb1 = self.geo.shifted_values(h)
        dH = (H[:, None] - Hb) / self.geo.two_s
        shifted = self.k_Hb * Hb + self.k_Hb1 * Hb1 + self.k_D * dH
        return self.a_H * H + self.a_H1 * H1 + np.sum(shifted, axis=1)

    def apply_cos_basis(self, n: int) -> np.ndarray:
        """Columns sum_i D_i[R] cos(j m x), j = 1..n, as an (n_points, n) array."""
        geo = self.geo
        m = geo.contour.m
        kint = m * np.arange(1, n + 1)
        k = kint.astype(float)
        cx, sx = _grid_trig(geo.n_points, kint)
        cu, su = _node_trig(geo.quad.n_nodes, kint)
        # sin(k u / 2) on the nodes, angle reduced in integers
        half = _node_trig(2 * geo.quad.n_nodes, kint)[1][: geo.quad.n_nodes]
        A = 2.0 * half**2 / geo.two_s[:, None]  # (1 - cos k u) / (2 sin(u/2))
        B = su / geo.two_s[:, None]  # sin(k u) / (2 sin(u/2))

        hb_c, hb_s = self.k_Hb @ cu, self.k_Hb @ su
        h1_c, h1_s = self.k_Hb1 @ cu, self.k_Hb1 @ su
        d_a, d_b = self.k_D @ A, self.k_D @ B
        aH, aH1 = self.a_H[:, None], self.a_H1[:, None]
        return (
            aH * cx
            - k * aH1 * sx
            + cx * hb_c
            + sx * hb_s
            - k * (sx * h1_c - cx * h1_s)
            + cx * d_a
            - sx * d_b
        )


def cos_basis(contour: RadialContour, j: int) -> RadialContour:
    """The perturbation cos(j m x) on the contour's mode layout."""
    c = np.zeros(contour.n_modes)
    c[j - 1] = 1.0
    return RadialContour(contour.m, c, base=0.0)


def gateaux(omega: float, contour: RadialContour, h: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), n_points: int | None = None) -> np.ndarray:
    """Omega h'(x) - sum_i D_i[R] h(x): the derivative of F(Omega, .) at R along h."""
    geo = Geometry(contour, alpha, quad, n_points)
    H1 = values_at(h, geo.x, 1)
    return omega * H1 - LinearKernels(geo).apply(h)


def fd_gateaux(omega: float, contour: RadialContour, h: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), t: float = 1e-6, n_points: int | None = None) -> np.ndarray:
    """(F(Omega, R + t h) - F(Omega, R)) / t, a test oracle for :func:`gateaux`."""
    if t == 0:
        raise ValueError("t must be nonzero")
    f0 = eval_F_grid(omega, contour, alpha, quad, n_points)
    f1 = eval_F_grid(omega, contour + h.scaled(t), alpha, quad, n_points)
    return (f1 - f0) / t


def d_omega(contour: RadialContour, n_points: int) -> np.ndarray:
    """dF/dOmega = R' on the grid."""
    return values_at(contour, 2.0 * np.pi * np.arange(n_points) / n_points, 1)


@dataclass(frozen=True, eq=False)
class JacobianMatrix:
    """Sine response of F to cosine perturbations, plus the Omega column.

    ``matrix[i, j]`` is the sin((i+1) m x) coefficient of the derivative along
    cos((j+1) m x); ``omega_column[i]`` the same for dF/dOmega.
    """

    m: int
    omega: float
    matrix: np.ndarray
    omega_column: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    def off_diagonal_max(self) -> float:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return float(np.max(np.abs(off)))

    def newton_matrix(self) -> np.ndarray:
        """Square system for unknowns (Omega, c_2..c_n): column 0 is dF/dOmega."""
        out = self.matrix.copy()
        out[:, 0] = self.omega_column
        return out


def _sine_columns(values: np.ndarray, m: int, n: int) -> np.ndarray:
    fhat = np.fft.rfft(values, axis=0) / values.shape[0]
    return -2.0 * fhat.imag[m * np.arange(1, n + 1)]


def assemble_jacobian(omega: float, contour: RadialContour, alpha, quad: QuadratureConfig = QuadratureConfig(), n: int | None = None, n_points: int | None = None) -> JacobianMatrix:
    """Dense Jacobian of the sine coefficients of F w.r.t. c_1..c_n and Omega."""
    if not contour.is_even:
        raise ValueError("the Jacobian is assembled for even contours")
    n = contour.n_modes if n is None else int(n)
    if not 1 <= n <= contour.n_modes:
        raise ValueError(f"n must lie in 1..{contour.n_modes}")
    geo = Geometry(contour, alpha, quad, n_points)
    kern = LinearKernels(geo)
    m = contour.m
    k = m * np.arange(1, n + 1)
    _, sx = _grid_trig(geo.n_points, k)
    cols = omega * (-k * sx) - kern.apply_cos_basis(n)
    matrix = _sine_columns(cols, m, n)
    omega_column = -(m * np.arange(1, n + 1)) * contour.cos[:n]
    return JacobianMatrix(m, float(omega), matrix, omega_column)
