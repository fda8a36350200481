"""Star-shaped patch boundaries as truncated m-fold Fourier series.

A contour is R(x) = base + sum_j c_j cos(j m x) + s_j sin(j m x), j = 1..n_modes,
with base = 1 for every solver input. Coefficients are the primary data; grid
samples are derived.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NotStarShapedError",
    "RadialContour",
    "GridSamples",
    "DecayReport",
    "min_grid_points",
    "default_grid_points",
    "grid",
    "evaluate",
    "values_at",
    "coefficients_from_grid",
    "curvature",
    "is_convex",
    "sobolev_norm",
    "xlog_norm",
    "decay_report",
    "rotate",
]


class NotStarShapedError(ValueError):
    """R(x) <= 0 somewhere: the contour is not a star-shaped curve."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class RadialContour:
    """Coefficients of an m-fold radial boundary function.

    ``cos[j-1]`` and ``sin[j-1]`` multiply cos(j m x) and sin(j m x).
    ``base`` is the constant mode; it is 1 for the bifurcation problem and
    only moves during time evolution.
    """

    m: int
    cos: np.ndarray
    sin: np.ndarray = None
    base: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"symmetry m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        c = _frozen(self.cos)
        s = _frozen(np.zeros_like(c) if self.sin is None else self.sin)
        if c.size == 0:
            raise ValueError("need at least one mode")
        if c.shape != s.shape:
            raise ValueError("cos and sin coefficient arrays differ in length")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s)) and math.isfinite(self.base)):
            raise ValueError("contour coefficients must be finite")
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)
        object.__setattr__(self, "base", float(self.base))

    @classmethod
    def disk(cls, m: int, n_modes: int) -> "RadialContour":
        return cls(m, np.zeros(n_modes))

    @classmethod
    def even(cls, m: int, cos) -> "RadialContour":
        return cls(m, cos)

    @property
    def n_modes(self) -> int:
        return self.cos.size

    @property
    def frequencies(self) -> np.ndarray:
        """Absolute mode numbers j*m."""
        return self.m * np.arange(1, self.n_modes + 1)

    @property
    def is_even(self) -> bool:
        return not np.any(self.sin)

    def amplitude(self) -> float:
        """sum |c_j| + |s_j|, an upper bound for |R - base|."""
        return float(np.sum(np.abs(self.cos)) + np.sum(np.abs(self.sin)))

    def check_solver_ball(self) -> None:
        if self.base != 1.0:
            raise ValueError("solver contours have base radius 1")
        if self.amplitude() >= 1.0:
            raise NotStarShapedError(
                f"sum of |coefficients| = {self.amplitude():.6g} must stay below 1"
            )

    def replace(self, **kw) -> "RadialContour":
        d = dict(m=self.m, cos=self.cos, sin=self.sin, base=self.base)
        d.update(kw)
        return RadialContour(**d)

    def truncated(self, n_modes: int) -> "RadialContour":
        if n_modes >= self.n_modes:
            pad = n_modes - self.n_modes
            return self.replace(cos=np.pad(self.cos, (0, pad)), sin=np.pad(self.sin, (0, pad)))
        return self.replace(cos=self.cos[:n_modes], sin=self.sin[:n_modes])

    def __add__(self, other: "RadialContour") -> "RadialContour":
        if other.m != self.m or other.n_modes != self.n_modes:
            raise ValueError("contours must share m and n_modes")
        return RadialContour(self.m, self.cos + other.cos, self.sin + other.sin, self.base + other.base)

    def scaled(self, t: float) -> "RadialContour":
        """t times every coefficient, base included (for perturbations)."""
        return RadialContour(self.m, t * self.cos, t * self.sin, t * self.base)

    def __eq__(self, other):
        if not isinstance(other, RadialContour):
            return NotImplemented
        return (
            self.m == other.m
            and self.base == other.base
            and np.array_equal(self.cos, other.cos)
            and np.array_equal(self.sin, other.sin)
        )

    __hash__ = None

    # flat text record: m, n_modes, c_1..c_n, s_1..s_n [, base]
    def to_record(self) -> str:
        fields = [str(self.m), str(self.n_modes)]
        fields += [format(v, ".17g") for v in self.cos]
        fields += [format(v, ".17g") for v in self.sin]
        if self.base != 1.0:
            fields.append(format(self.base, ".17g"))
        return ",".join(fields)

    @classmethod
    def from_record(cls, text: str) -> "RadialContour":
        parts = [p.strip() for p in text.strip().split(",")]
        if len(parts) < 2:
            raise ValueError("contour record needs at least m and n_modes")
        m, n = int(parts[0]), int(parts[1])
        vals = [float(p) for p in parts[2:]]
        if len(vals) not in (2 * n, 2 * n + 1):
            raise ValueError(f"expected {2 * n} coefficients for n_modes={n}, got {len(vals)}")
        base = vals[2 * n] if len(vals) == 2 * n + 1 else 1.0
        return cls(m, vals[:n], vals[n : 2 * n], base)


def min_grid_points(contour: RadialContour) -> int:
    return 4 * contour.m * contour.n_modes


def default_grid_points(contour: RadialContour, requested: int = 256) -> int:
    """Smallest multiple of 2m that is >= requested and the anti-aliasing minimum.

    A multiple of m keeps aliased lattice frequencies on the lattice.
    """
    n = max(int(requested), min_grid_points(contour))
    step = 2 * contour.m
    return -(-n // step) * step


def grid(n_points: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_points) / n_points


@dataclass(frozen=True, eq=False)
class GridSamples:
    n_points: int
    x: np.ndarray
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def values_at(contour: RadialContour, x, derivative: int = 0) -> np.ndarray:
    """Direct evaluation of R (or its first/second derivative) at arbitrary angles."""
    x = np.asarray(x, dtype=float)
    k = contour.frequencies.astype(float)
    phase = np.multiply.outer(x, k)
    c, s = np.cos(phase), np.sin(phase)
    if derivative == 0:
        out = c @ contour.cos + s @ contour.sin + contour.base
    elif derivative == 1:
        out = s @ (-k * contour.cos) + c @ (k * contour.sin)
    elif derivative == 2:
        out = -(c @ (k**2 * contour.cos) + s @ (k**2 * contour.sin))
    else:
        raise ValueError("derivative must be 0, 1 or 2")
    return out


def evaluate(contour: RadialContour, n_points: int) -> GridSamples:
    """Sample R, R', R'' on the uniform grid x_i = 2 pi i / n_points."""
    if n_points < min_grid_points(contour):
        raise ValueError(
            f"n_points={n_points} below the anti-aliasing minimum {min_grid_points(contour)}"
        )
    x = grid(n_points)
    vals = values_at(contour, x)
    if np.any(vals <= 0.0):
        i = int(np.argmin(vals))
        raise NotStarShapedError(f"R(x) = {vals[i]:.6g} <= 0 at x = {x[i]:.6g}")
    return GridSamples(n_points, x, vals, values_at(contour, x, 1), values_at(contour, x, 2))


def coefficients_from_grid(values, m: int, n_modes: int):
    """Project grid samples onto (base, cos, sin) of modes j*m, j = 1..n_modes."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if m * n_modes >= n / 2:
        raise ValueError("grid too coarse for the requested modes")
    fhat = np.fft.rfft(values) / n
    idx = m * np.arange(1, n_modes + 1)
    return fhat[0].real, 2.0 * fhat[idx].real, -2.0 * fhat[idx].imag


def curvature(contour: RadialContour, x):
    """Signed curvature (R^2 + 2R'^2 - R R'') / (R^2 + R'^2)^(3/2)."""
    r = values_at(contour, x)
    r1 = values_at(contour, x, 1)
    r2 = values_at(contour, x, 2)
    k = (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5
    return float(k) if np.ndim(k) == 0 else k


def is_convex(contour: RadialContour, n_points: int | None = None):
    """(min curvature > 0, min curvature) sampled on the grid."""
    if n_points is None:
        n_points = 8 * contour.m * contour.n_modes
    g = evaluate(contour, n_points)
    r, r1, r2 = g.values, g.d1, g.d2
    kappa = (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5
    kmin = float(kappa.min())
    return kmin > 0.0, kmin


def sobolev_norm(contour: RadialContour, k: float) -> float:
    """(sum_j (c_j^2 + s_j^2) (j m)^(2k))^(1/2); the constant mode is excluded."""
    if k < 0:
        raise ValueError("k must be non-negative")
    w = contour.frequencies.astype(float) ** (2.0 * k)
    return float(math.sqrt(np.sum(w * (contour.cos**2 + contour.sin**2))))


def xlog_norm(contour: RadialContour, k: int) -> float:
    """Log-weighted norm: |a_1|^2 + sum_{n>=2} |a_n|^2 n^(2k) (1 + log n)^2, n = j m.

    Defined for cosine series only.
    """
    if int(k) != k or k < 0:
        raise ValueError("k must be a non-negative integer")
    if not contour.is_even:
        raise ValueError("xlog_norm is defined for cosine-only contours")
    n = contour.frequencies.astype(float)
    w = np.where(n == 1.0, 1.0, n ** (2 * k) * (1.0 + np.log(n)) ** 2)
    return float(math.sqrt(np.sum(w * contour.cos**2)))


@dataclass(frozen=True)
class DecayReport:
    entries: tuple  # ((j, |c_j| + |s_j|), ...)
    ratio: float | None  # fitted geometric ratio, None when undefined
    fitted_modes: tuple = field(default=())

    @property
    def rate(self) -> float | None:
        """Fitted decay exponent: magnitude ~ exp(-rate * j)."""
        return None if self.ratio is None else -math.log(self.ratio)


def decay_report(contour: RadialContour, floor: float = 1e-13) -> DecayReport:
    """Per-mode magnitudes and a log-linear fit of their decay.

    Modes below ``floor`` times the largest magnitude are left out of the fit
    (they are roundoff). Fewer than two usable modes gives ratio None.
    """
    mags = np.abs(contour.cos) + np.abs(contour.sin)
    entries = tuple((j + 1, float(v)) for j, v in enumerate(mags))
    top = float(mags.max()) if mags.size else 0.0
    use = [j for j, v in entries if top > 0 and v > floor * top]
    if len(use) < 2:
        return DecayReport(entries, None, tuple(use))
    js = np.array(use, dtype=float)
    logs = np.log(mags[np.array(use) - 1])
    slope = np.polyfit(js, logs, 1)[0]
    return DecayReport(entries, float(math.exp(slope)), tuple(use))


def rotate(contour: RadialContour, angle: float) -> RadialContour:
    """The contour x -> R(x - angle); mode j m picks up phase j m angle."""
    ph = contour.frequencies * float(angle)
    ca, sa = np.cos(ph), np.sin(ph)
    c, s = contour.cos, contour.sin
    return contour.replace(cos=c * ca - s * sa, sin=c * sa + s * ca)
