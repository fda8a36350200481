"""Closed-form scalars for gSQG V-states.

Gamma function, the kernel normalisation C(alpha), the eigenvalues of the
singular difference operator and the dispersion values Omega_k at which
m-fold branches leave the disk.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

__all__ = [
    "Alpha",
    "GammaPoleError",
    "DispersionTable",
    "gamma_real",
    "rgamma",
    "gamma_ratio",
    "c_alpha",
    "sine_power_exp_integral",
    "lambda_k",
    "omega_k",
    "dispersion_table",
]

# |alpha - 1| below this uses an ill-conditioned Gamma(1 - alpha) formula
NEAR_ONE = 1e-6
# Largest argument for which math.gamma does not overflow
_GAMMA_MAX = 171.6


class GammaPoleError(ValueError):
    """Gamma evaluated at a non-positive integer."""


@dataclass(frozen=True)
class Alpha:
    """The gSQG exponent, restricted to the open interval (0, 2)."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 < v < 2.0) or math.isnan(v):
            raise ValueError(f"alpha must lie in (0, 2), got {self.value!r}")
        object.__setattr__(self, "value", v)

    def __float__(self):
        return self.value

    @property
    def is_one(self) -> bool:
        return self.value == 1.0


def _as_alpha(alpha) -> Alpha:
    return alpha if isinstance(alpha, Alpha) else Alpha(alpha)


def _is_pole(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _sinpi(x: float) -> float:
    # sin(pi*x) with the argument reduced first; exact zeros at integers
    n = round(x)
    r = x - n
    s = math.sin(math.pi * r)
    return -s if n % 2 else s


def gamma_real(x: float) -> float:
    """Gamma function for real arguments.

    Positive arguments go to the Lanczos-type evaluation in :func:`math.gamma`;
    negative non-integers use the reflection Gamma(z) Gamma(1-z) = pi / sin(pi z).

    Raises
    ------
    GammaPoleError
        At x = 0, -1, -2, ...
    OverflowError
        When Gamma(x) exceeds the double range (x > ~171.6).
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("gamma of NaN")
    if _is_pole(x):
        raise GammaPoleError(f"Gamma has a pole at {x}")
    if x > 0.0:
        if x > _GAMMA_MAX:
            raise OverflowError(f"Gamma({x}) overflows")
        return math.gamma(x)
    s = _sinpi(x)
    if 1.0 - x > _GAMMA_MAX:
        # Gamma(1-x) overflows: Gamma(x) is below the double range
        logmag = math.log(math.pi) - math.log(abs(s)) - math.lgamma(1.0 - x)
        return math.copysign(math.exp(logmag), s)
    return math.pi / (s * math.gamma(1.0 - x))


def rgamma(x: float) -> float:
    """Reciprocal Gamma, with the convention 1/Gamma = 0 at the poles."""
    if _is_pole(float(x)):
        return 0.0
    return 1.0 / gamma_real(x)


def gamma_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b) for positive a, b, without intermediate overflow."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("gamma_ratio requires positive arguments")
    if a < _GAMMA_MAX - 1 and b < _GAMMA_MAX - 1:
        return math.gamma(a) / math.gamma(b)
    return math.exp(math.lgamma(a) - math.lgamma(b))


def c_alpha(alpha) -> float:
    """Normalising constant C(alpha) of the patch velocity kernel."""
    a = _as_alpha(alpha).value
    return gamma_real(a / 2) / (2.0 ** (1.0 - a) * gamma_real(1.0 - a / 2)) / (2.0 * math.pi)


def sine_power_exp_integral(x_exp: float, y: float) -> complex:
    """Closed form of the integral of sin(eta)**x_exp * exp(i*y*eta) over [0, pi].

    Equal to pi exp(i pi y/2) Gamma(x+1) / (2^x Gamma(1+(x+y)/2) Gamma(1+(x-y)/2)).
    When 1 + (x +- y)/2 hits a pole of Gamma the value is 0 (the reciprocal
    Gamma vanishes there), which is also the value of the integral.
    """
    x = float(x_exp)
    if not x > -1.0:
        raise ValueError(f"x_exp must exceed -1, got {x_exp!r}")
    mag = math.pi * gamma_real(x + 1.0) / 2.0**x
    mag *= rgamma(1.0 + (x + y) / 2.0) * rgamma(1.0 + (x - y) / 2.0)
    return mag * cmath.exp(0.5j * math.pi * y)


def _check_k(k) -> int:
    if int(k) != k or k < 1:
        raise ValueError(f"mode number must be a positive integer, got {k!r}")
    return int(k)


def _warn_near_one(a: float) -> None:
    if a != 1.0 and abs(a - 1.0) < NEAR_ONE:
        warnings.warn(
            f"alpha={a!r} is within {NEAR_ONE:g} of 1; the Gamma(1-alpha) formula is ill-conditioned",
            RuntimeWarning,
            stacklevel=3,
        )


def _odd_harmonic(k: int, start: int = 1) -> float:
    # sum_{j=start}^{k} 1/(2j-1), correctly rounded
    return math.fsum(1.0 / (2 * j - 1) for j in range(k, start - 1, -1))


def lambda_k(alpha, k: int) -> float:
    """Eigenvalue of the singular difference operator on a frequency-k mode.

    For f = cos(kx) or sin(kx),
    integral over [0, 2pi] of (f(x) - f(x-y)) / sin(y/2)**alpha dy = lambda_k f(x).
    """
    a = _as_alpha(alpha).value
    k = _check_k(k)
    if a == 1.0:
        return 8.0 * _odd_harmonic(k)
    _warn_near_one(a)
    h = a / 2
    pref = 2.0**a * 2.0 * math.pi * gamma_real(1.0 - a) / (gamma_real(h) * gamma_real(1.0 - h))
    return pref * (gamma_real(h) / gamma_real(1.0 - h) - gamma_ratio(k + h, 1.0 + k - h))


def omega_k(alpha, k: int) -> float:
    """Dispersion value Omega_k: the angular velocity at which cos(kx) is neutral."""
    a = _as_alpha(alpha).value
    k = _check_k(k)
    if k == 1:
        return 0.0
    if a == 1.0:
        return -(2.0 / math.pi) * _odd_harmonic(k, start=2)
    _warn_near_one(a)
    h = a / 2
    pref = -(2.0 ** (a - 1.0)) * gamma_real(1.0 - a) / gamma_real(1.0 - h) ** 2
    return pref * (gamma_ratio(1.0 + h, 2.0 - h) - gamma_ratio(k + h, 1.0 + k - h))


@dataclass(frozen=True)
class DispersionTable:
    alpha: Alpha
    entries: tuple  # ((k, omega_k), ...)

    def __post_init__(self):
        ks = [k for k, _ in self.entries]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("dispersion entries must be strictly increasing in k")

    @property
    def ks(self) -> list:
        return [k for k, _ in self.entries]

    @property
    def omegas(self) -> list:
        return [w for _, w in self.entries]


def dispersion_table(alpha, k_max: int) -> DispersionTable:
    """Omega_k for k = 1..k_max."""
    a = _as_alpha(alpha)
    k_max = _check_k(k_max)
    return DispersionTable(a, tuple((k, omega_k(a, k)) for k in range(1, k_max + 1)))
