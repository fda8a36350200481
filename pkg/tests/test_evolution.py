import math

import numpy as np
import pytest
from scipy import integrate

from gsqg_vstates.continuation import BranchPoint, SolverConfig, bifurcation_point, newton_solve
from gsqg_vstates.contour import RadialContour, default_grid_points, rotate, values_at
from gsqg_vstates.evolution import (
    EvolutionState, TailEnergyError, area, heuristic_dt, rhs, rhs_coefficients, rigid_rotation_error, rk4_step,
)
from gsqg_vstates.functional import QuadratureConfig
from gsqg_vstates.special_functions import Alpha

QUAD = QuadratureConfig(1024)


@pytest.fixture(scope="module")
def vstate():
    s = 2e-2
    return newton_solve(1.0, 3, s, (bifurcation_point(1, 3), RadialContour(3, [s] + [0.0] * 7)), SolverConfig(n_modes=8))


def sup(a, b):
    x = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    return float(np.max(np.abs(values_at(a, x) - values_at(b, x))))


class TestRhs:
    def test_disk(self):
        assert np.max(np.abs(rhs(RadialContour.disk(3, 4), 1.0, QUAD))) <= 1e-15

    def test_vstate_rotates(self, vstate):
        n = default_grid_points(vstate.contour)
        x = 2 * np.pi * np.arange(n) / n
        want = -vstate.omega * values_at(vstate.contour, x, 1)
        assert np.max(np.abs(rhs(vstate.contour, 1.0) - want)) <= 1e-10

    @pytest.mark.parametrize("phi", [0.3, 2.0])
    def test_rotation_equivariance(self, phi):
        R = RadialContour(2, [0.03, 0.01, 0.002], [0.02, -0.004, 0.001])
        a = rhs_coefficients(rotate(R, phi), 1.3, QUAD)
        b = rotate(rhs_coefficients(R, 1.3, QUAD), phi)
        assert sup(a, b) <= 1e-9


class TestStep:
    def test_disk(self):
        st = rk4_step(EvolutionState(0.0, RadialContour.disk(2, 4)), 0.5, 1.0, QUAD)
        assert st.time == 0.5 and st.contour.amplitude() <= 1e-15

    def test_zero_dt(self, vstate):
        s0 = EvolutionState(1.0, vstate.contour)
        assert rk4_step(s0, 0.0, 1.0) is s0

    def test_negative_dt(self, vstate):
        with pytest.raises(ValueError):
            rk4_step(EvolutionState(0.0, vstate.contour), -0.1, 1.0)

    def test_disk_hundred_steps(self):
        st = EvolutionState(0.0, RadialContour.disk(3, 6))
        for _ in range(100):
            st = rk4_step(st, 0.05, 1.0, QUAD)
        assert st.contour.amplitude() < 1e-12 and abs(st.contour.base - 1) < 1e-12

    def test_local_order(self, vstate):
        errs = []
        for dt in (0.2, 0.1, 0.05):
            new = rk4_step(EvolutionState(0.0, vstate.contour), dt, 1.0, QUAD).contour
            errs.append(sup(new, rotate(vstate.contour, vstate.omega * dt)))
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all(orders >= 4)

    def test_tail_monitor(self):
        with pytest.raises(TailEnergyError):
            rk4_step(EvolutionState(0.0, RadialContour(2, [0.0, 0.0, 0.0, 0.01])), 1e-3, 1.0, QUAD)


class TestArea:
    def test_disk(self):
        assert area(RadialContour.disk(2, 2)) == math.pi

    def test_quadrature(self):
        R = RadialContour(2, [0.1, 0.02], [0.03, 0.0])
        val, _ = integrate.quad(lambda x: 0.5 * float(values_at(R, x)) ** 2, 0, 2 * math.pi, epsabs=1e-14)
        assert area(R) == pytest.approx(val, rel=1e-13)


class TestRigidRotation:
    def test_disk_point(self):
        disk = RadialContour.disk(3, 8)
        pt = BranchPoint(Alpha(1.0), 3, 0.0, bifurcation_point(1, 3), disk, 0.0, 1.0, 0)
        rep = rigid_rotation_error(pt, 1.0, 0.1, n_modes=4)
        assert rep.max_error <= 1e-14 and rep.area_drift <= 1e-15

    def test_short_run(self, vstate):
        rep = rigid_rotation_error(vstate, 0.5, 0.01, n_modes=8)
        assert rep.steps == 50 and rep.max_error < 1e-10 and rep.area_drift < 1e-12
        lines = rep.to_csv().splitlines()
        assert lines[0] == "t,max_error,area" and len(lines) == 1 + len(rep.checkpoints)

    def test_zero_time(self, vstate):
        rep = rigid_rotation_error(vstate, 0.0, 0.1)
        assert rep.steps == 0 and rep.max_error == 0.0

    def test_heuristic(self):
        assert heuristic_dt(1.0, 3, 8) == pytest.approx(0.1 / (24 * 16 / (15 * math.pi)))

    def test_bad_dt(self, vstate):
        with pytest.raises(ValueError):
            rigid_rotation_error(vstate, 1.0, -1.0)
