import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from gsqg_vstates import continuation as cont
from gsqg_vstates.continuation import (
    ConvergenceError, SingularJacobianError, SolverConfig, bifurcation_point, dumps_branch,
    Branch, BranchPoint, extrapolate_omega, load_branch, loads_branch, newton_solve, save_branch, trace_branch,
)
from gsqg_vstates.contour import NotStarShapedError, RadialContour
from gsqg_vstates.special_functions import Alpha
from gsqg_vstates.functional import QuadratureConfig, eval_F_grid
from gsqg_vstates.linearization import assemble_jacobian

FAST = SolverConfig(n_modes=12)
# Omega at s = 1e-3 on the (alpha=1, m=3) branch with default resolution, frozen
# after cross-checking against doubled quadrature nodes
OMEGA_S1E3 = -0.33952983251559887


@pytest.fixture(scope="module")
def branch13():
    return trace_branch(1.0, 3, 5e-3, 1e-3, FAST)


class TestBifurcationPoint:
    def test_equals_omega_m(self):
        assert bifurcation_point(1, 2) == pytest.approx(-2 / (3 * math.pi), abs=1e-15)
        assert bifurcation_point(1, 3) == pytest.approx(-16 / (15 * math.pi), abs=1e-15)

    def test_root_of_jacobian_diagonal(self):
        disk = RadialContour.disk(2, 2)
        root = brentq(lambda om: assemble_jacobian(om, disk, 1.5, QuadratureConfig(512), n=1).matrix[0, 0],
                      -2.0, 1.0, xtol=1e-15)
        assert root == pytest.approx(bifurcation_point(1.5, 2), abs=1e-12)

    @pytest.mark.parametrize("m", [1, 0, 2.5])
    def test_rejects_small_m(self, m):
        with pytest.raises(ValueError):
            bifurcation_point(1, m)


class TestNewton:
    def test_s_zero_disk(self):
        p = newton_solve(1.0, 3, 0.0, (0.123, RadialContour.disk(3, 8)), FAST)
        assert p.omega == 0.123 and p.residual_norm == 0.0 and p.newton_iters == 0
        assert np.all(p.contour.cos == 0)

    def test_s_zero_other_guess(self):
        with pytest.raises(ValueError):
            newton_solve(1.0, 3, 0.0, (0.0, RadialContour(3, [0.0, 0.01] + [0.0] * 10)), FAST)

    def test_first_point_regression(self):
        om3 = bifurcation_point(1, 3)
        s = 1e-3
        guess = (om3, RadialContour(3, [s] + [0.0] * 31))
        p = newton_solve(1.0, 3, s, guess)
        assert p.residual_norm <= 1e-10 and p.contour.cos[0] == s
        assert abs(p.omega - om3) < 2 * s**2
        assert p.omega == pytest.approx(OMEGA_S1E3, abs=1e-12)
        fine = newton_solve(1.0, 3, s, guess, SolverConfig(quad_nodes=4096))
        assert abs(fine.omega - p.omega) < 1e-12

    def test_continuation_step(self):
        om3 = bifurcation_point(1, 3)
        p1 = newton_solve(1.0, 3, 1e-3, (om3, RadialContour(3, [1e-3] + [0.0] * 11)), FAST)
        p2 = newton_solve(1.0, 3, 1e-2, (p1.omega, p1.contour), FAST)
        assert p2.newton_iters <= 6 and p2.residual_norm <= 1e-10

    @staticmethod
    def _tail_ok(h):
        for prev, new in list(zip(h, h[1:]))[-2:]:
            if prev > 1e-14 and prev / new < 1e3:
                return False
        return True

    def test_quadratic_tail(self):
        s = 5e-2
        p = newton_solve(1.0, 3, s, (bifurcation_point(1, 3), RadialContour(3, [s] + [0.0] * 11)), FAST)
        assert len(p.residual_history) >= 3 and self._tail_ok(p.residual_history)

    def test_quadratic_rate(self):
        s = 2e-2
        h = newton_solve(1.0, 3, s, (bifurcation_point(1, 3), RadialContour(3, [s] + [0.0] * 11)), FAST).residual_history
        assert h[2] <= 10 * h[1] ** 2

    def test_outside_ball(self):
        with pytest.raises(NotStarShapedError):
            newton_solve(1.0, 3, 0.31, (0.0, RadialContour.disk(3, 4)), FAST)

    def test_singular(self):
        cfg = SolverConfig(n_modes=4, cond_max=10.0)
        with pytest.raises(SingularJacobianError) as info:
            newton_solve(1.0, 3, 1e-2, (bifurcation_point(1, 3), RadialContour(3, [1e-2, 0, 0, 0])), cfg)
        assert info.value.cond > 10

    def test_divergence(self):
        cfg = SolverConfig(n_modes=4, max_iter=1)
        with pytest.raises(ConvergenceError):
            newton_solve(1.0, 3, 5e-2, (0.5, RadialContour(3, [5e-2, 0, 0, 0])), cfg)

    def test_wrong_guess(self):
        with pytest.raises(ValueError):
            newton_solve(1.0, 3, 1e-2, (0.0, RadialContour(2, [0.0])), FAST)
        with pytest.raises(ValueError):
            newton_solve(1.0, 3, 1e-2, (0.0, RadialContour(3, [0.0], [0.1])), FAST)


class TestTrace:
    def test_five_points(self, branch13):
        assert len(branch13.points) == 5 and branch13.complete
        assert abs(extrapolate_omega(branch13) - bifurcation_point(1, 3)) < 1e-4

    def test_point_invariants(self, branch13):
        s = branch13.s_values()
        assert np.all(np.diff(s) > 0)
        for p in branch13.points:
            assert p.residual_norm <= 1e-10
            assert p.min_curvature > 0
            assert p.contour.is_even and p.contour.cos[0] == p.s
            F = eval_F_grid(p.omega, p.contour, 1.0)
            n = F.size
            i = np.arange(n)
            assert np.max(np.abs(F[(-i) % n] + F)) <= 1e-9
            assert np.max(np.abs(F[(i + n // 3) % n] - F)) <= 1e-9

    def test_quadratic_tail_along_branch(self, branch13):
        assert all(TestNewton._tail_ok(p.residual_history) for p in branch13.points)

    def test_omega_continuous(self, branch13):
        assert np.max(np.abs(np.diff(branch13.omegas()))) < 1e-4

    def test_doubled_nodes(self, branch13):
        fine = trace_branch(1.0, 3, 5e-3, 1e-3, SolverConfig(n_modes=12, quad_nodes=4096))
        assert np.max(np.abs(fine.omegas() - branch13.omegas())) < 1e-7

    def test_alpha_half(self):
        b = trace_branch(0.5, 2, 3e-3, 1e-3, FAST)
        assert len(b.points) == 3 and all(p.residual_norm <= 1e-10 for p in b.points)

    def test_leaves_ball(self):
        b = trace_branch(1.0, 3, 5e-3, 1e-3, SolverConfig(n_modes=6, s_ball=2.5e-3))
        assert len(b.points) == 2 and "solver ball" in b.diagnostic

    def test_singular_retry(self, monkeypatch):
        real = cont.newton_solve
        calls = {"n": 0}

        def flaky(alpha, m, s, guess, config):
            if abs(s - 2e-3) < 1e-12 and calls["n"] == 0:
                calls["n"] += 1
                raise SingularJacobianError(1e13)
            return real(alpha, m, s, guess, config)

        monkeypatch.setattr(cont, "newton_solve", flaky)
        b = trace_branch(1.0, 3, 3e-3, 1e-3, SolverConfig(n_modes=6))
        assert b.complete and len(b.points) == 3 and calls["n"] == 1

    def test_first_point_failure(self):
        with pytest.raises(ConvergenceError):
            trace_branch(1.0, 3, 1e-2, 1e-2, SolverConfig(n_modes=4, max_iter=0))

    def test_rejects_m1(self):
        with pytest.raises(ValueError):
            trace_branch(1.0, 1, 1e-2, 1e-3, FAST)


class TestPersistence:
    def test_round_trip(self, branch13, tmp_path):
        path = tmp_path / "b.txt"
        save_branch(branch13, path)
        back = load_branch(path)
        assert back.points == branch13.points
        assert back.config == branch13.config and back.alpha == branch13.alpha
        assert dumps_branch(back) == path.read_text()

    def test_layout(self, branch13):
        lines = dumps_branch(branch13).splitlines()
        header = json.loads(lines[0][2:])
        assert header["m"] == 3 and header["config"]["n_modes"] == 12
        f = lines[1].split(",")
        assert len(f) == 8 + 12 and f[0] == "1" and f[1] == "3" and int(f[7]) == 12

    def test_partial_diagnostic_kept(self):
        b = cont.Branch(cont.Alpha(1.0), 3, FAST, (), "stopped")
        assert loads_branch(dumps_branch(b)).diagnostic == "stopped"

    def test_malformed(self, branch13):
        text = dumps_branch(branch13)
        with pytest.raises(ValueError):
            loads_branch(text.split("\n", 1)[1])
        bad = text.splitlines()
        bad[1] = ",".join(bad[1].split(",")[:-1])
        with pytest.raises(ValueError):
            loads_branch("\n".join(bad))


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def branches(draw):
    alpha = Alpha(draw(st.floats(0.01, 1.99)))
    m = draw(st.integers(2, 6))
    n = draw(st.integers(1, 5))
    pts = []
    for _ in range(draw(st.integers(0, 4))):
        c = draw(st.lists(st.floats(-0.1, 0.1), min_size=n, max_size=n))
        pts.append(BranchPoint(alpha, m, draw(finite), draw(finite), RadialContour(m, c),
                               draw(st.floats(0, 1)), draw(finite), draw(st.integers(0, 12))))
    diag = draw(st.none() | st.text(max_size=20))
    return Branch(alpha, m, SolverConfig(n_modes=max(n, 2)), tuple(pts), diag)


@given(branches())
def test_branch_text_round_trip(b):
    again = loads_branch(dumps_branch(b))
    assert again == b
    assert dumps_branch(again) == dumps_branch(b)
