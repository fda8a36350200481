"""Branches of m-fold V-states bifurcating from the disk.

The branch is parametrized by the amplitude s = c_1 of the primary mode cos(m x).
For fixed s the unknowns are (Omega, c_2, ..., c_n) and the equations are the
n sine coefficients of F(Omega, R); Newton uses the analytic Jacobian.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .contour import NotStarShapedError, RadialContour, default_grid_points, is_convex
from .functional import QuadratureConfig, eval_F_sine
from .linearization import assemble_jacobian
from .special_functions import Alpha, _as_alpha, omega_k

__all__ = [
    "SolverConfig",
    "BranchPoint",
    "Branch",
    "ConvergenceError",
    "SingularJacobianError",
    "bifurcation_point",
    "newton_solve",
    "trace_branch",
    "extrapolate_omega",
    "save_branch",
    "load_branch",
    "dumps_branch",
    "loads_branch",
]


class ConvergenceError(RuntimeError):
    """Newton did not reach the tolerance."""


class SingularJacobianError(RuntimeError):
    def __init__(self, cond: float):
        super().__init__(f"Newton matrix is near singular (condition number {cond:.3e})")
        self.cond = cond


@dataclass(frozen=True)
class SolverConfig:
    n_modes: int = 32
    grid_points: int = 256
    quad_nodes: int = 2048
    tol: float = 1e-10
    max_iter: int = 12
    s_ball: float = 0.3
    cond_max: float = 1e12

    def __post_init__(self):
        if self.n_modes < 2:
            raise ValueError("n_modes must be at least 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        QuadratureConfig(self.quad_nodes)  # validates

    @property
    def quad(self) -> QuadratureConfig:
        return QuadratureConfig(self.quad_nodes)

    def n_points(self, contour: RadialContour) -> int:
        return default_grid_points(contour, self.grid_points)


@dataclass(frozen=True)
class BranchPoint:
    alpha: Alpha
    m: int
    s: float
    omega: float
    contour: RadialContour
    residual_norm: float
    min_curvature: float
    newton_iters: int
    residual_history: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class Branch:
    alpha: Alpha
    m: int
    config: SolverConfig
    points: tuple
    diagnostic: str | None = None

    @property
    def complete(self) -> bool:
        return self.diagnostic is None

    def s_values(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    def omegas(self) -> np.ndarray:
        return np.array([p.omega for p in self.points])


def bifurcation_point(alpha, m: int) -> float:
    """Omega_m, where the m-fold branch leaves the disk."""
    if int(m) != m or m < 2:
        raise ValueError("branches exist for m >= 2")
    return omega_k(alpha, int(m))


def _point(alpha, m, s, omega, contour, res, iters, history) -> BranchPoint:
    _, kmin = is_convex(contour)
    return BranchPoint(alpha, m, float(s), float(omega), contour, float(res), kmin, iters, tuple(history))


def newton_solve(alpha, m: int, s: float, guess, config: SolverConfig = SolverConfig()) -> BranchPoint:
    """Solve F(Omega, R) = 0 with c_1 = s held fixed.

    ``guess`` is (omega, contour). Its c_1 is overwritten by s.
    """
    a = _as_alpha(alpha)
    omega, contour = float(guess[0]), guess[1]
    if contour.m != m:
        raise ValueError("guess has the wrong symmetry")
    if not contour.is_even:
        raise ValueError("guess must be a cosine series")
    if abs(s) > config.s_ball:
        raise NotStarShapedError(f"|s| = {abs(s):.3g} lies outside the solver ball {config.s_ball:g}")
    if s == 0.0:
        # F(Omega, 1) = 0 for every Omega: the s = 0 problem is degenerate
        if np.any(contour.cos):
            raise ValueError("s = 0 is only solved by the disk; pass the disk as the guess")
        return _point(a, m, 0.0, omega, contour.replace(base=1.0), 0.0, 0, (0.0,))

    c = np.array(contour.cos, dtype=float)
    c[0] = s
    quad = config.quad
    history = []
    for it in range(config.max_iter + 1):
        R = RadialContour(m, c)
        R.check_solver_ball()
        npts = config.n_points(R)
        res = eval_F_sine(omega, R, a, quad, npts).coeffs
        rnorm = float(np.max(np.abs(res)))
        history.append(rnorm)
        if not math.isfinite(rnorm):
            raise ConvergenceError("residual is not finite")
        if rnorm <= config.tol:
            return _point(a, m, s, omega, R, rnorm, it, history)
        if it == config.max_iter:
            break
        A = assemble_jacobian(omega, R, a, quad, n_points=npts).newton_matrix()
        cond = float(np.linalg.cond(A))
        if not cond < config.cond_max:
            raise SingularJacobianError(cond)
        step = np.linalg.solve(A, -res)
        omega += step[0]
        c[1:] += step[1:]
    raise ConvergenceError(
        f"no convergence in {config.max_iter} iterations; residuals {', '.join(f'{r:.2e}' for r in history)}"
    )


def trace_branch(alpha, m: int, s_max: float, ds: float, config: SolverConfig = SolverConfig()) -> Branch:
    """Points at s = ds, 2 ds, ... up to s_max, each seeded by a linear predictor.

    A failed step is retried once at half the step when the Newton matrix is
    near singular. Any other failure ends the trace; the partial branch
    carries the reason in ``diagnostic``.
    """
    a = _as_alpha(alpha)
    om = bifurcation_point(a, m)
    if not ds > 0 or not s_max > 0:
        raise ValueError("ds and s_max must be positive")
    n_steps = int(math.floor(s_max / ds + 1e-9))
    disk = RadialContour.disk(m, config.n_modes)
    prev = (0.0, om, disk.cos)
    last = None
    points = []
    diagnostic = None
    for k in range(1, n_steps + 1):
        s = k * ds
        if s > config.s_ball:
            diagnostic = f"s = {s:.6g} leaves the solver ball |s| <= {config.s_ball:g}"
            break
        try:
            pt = _predict_and_solve(a, m, s, prev, last, config)
        except SingularJacobianError:
            try:
                half = _predict_and_solve(a, m, s - 0.5 * ds, prev, last, config)
                pt = _predict_and_solve(a, m, s, (half.s, half.omega, half.contour.cos), prev, config)
            except (SingularJacobianError, ConvergenceError, NotStarShapedError) as exc:
                diagnostic = f"stopped at s = {s:.6g}: {exc}"
                break
        except (ConvergenceError, NotStarShapedError) as exc:
            if not points:
                raise
            diagnostic = f"stopped at s = {s:.6g}: {exc}"
            break
        points.append(pt)
        last, prev = prev, (pt.s, pt.omega, pt.contour.cos)
    return Branch(a, m, config, tuple(points), diagnostic)


def _predict_and_solve(a, m, s, prev, last, config):
    s1, om1, c1 = prev
    if last is None:
        om, c = om1, np.array(c1)
    else:
        s0, om0, c0 = last
        t = (s - s1) / (s1 - s0)
        om = om1 + t * (om1 - om0)
        c = np.asarray(c1) + t * (np.asarray(c1) - np.asarray(c0))
    return newton_solve(a, m, s, (om, RadialContour(m, c)), config)


def extrapolate_omega(branch: Branch, n_fit: int = 5) -> float:
    """Omega at s = 0 from a fit of Omega against s^2 over the first points."""
    pts = branch.points[:n_fit]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    s2 = np.array([p.s for p in pts]) ** 2
    om = np.array([p.omega for p in pts])
    deg = 2 if len(pts) >= 4 else 1
    return float(np.polyfit(s2, om, deg)[-1])


# persistence: "# {json header}" then one comma-separated line per point

_FMT = ".17g"


def _f(x) -> str:
    return format(float(x), _FMT)


def dumps_branch(branch: Branch) -> str:
    header = {"alpha": branch.alpha.value, "m": branch.m, "config": asdict(branch.config)}
    if branch.diagnostic is not None:
        header["diagnostic"] = branch.diagnostic
    lines = ["# " + json.dumps(header, sort_keys=True)]
    for p in branch.points:
        fields = [_f(p.alpha.value), str(p.m), _f(p.s), _f(p.omega), _f(p.residual_norm),
                  str(p.newton_iters), _f(p.min_curvature), str(p.contour.n_modes)]
        fields += [_f(v) for v in p.contour.cos]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def loads_branch(text: str) -> Branch:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("branch file must start with a '# {json}' header")
    header = json.loads(lines[0][1:])
    config = SolverConfig(**header["config"])
    alpha = Alpha(header["alpha"])
    points = []
    for ln in lines[1:]:
        f = ln.split(",")
        n = int(f[7])
        if len(f) != 8 + n:
            raise ValueError(f"record has {len(f) - 8} coefficients, header says {n}")
        m = int(f[1])
        points.append(
            BranchPoint(
                Alpha(float(f[0])), m, float(f[2]), float(f[3]),
                RadialContour(m, [float(v) for v in f[8:]]),
                float(f[4]), float(f[6]), int(f[5]),
            )
        )
    return Branch(alpha, int(header["m"]), config, tuple(points), header.get("diagnostic"))


def save_branch(branch: Branch, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_branch(branch))


def load_branch(path) -> Branch:
    with open(path, encoding="utf-8") as fh:
        return loads_branch(fh.read())
