"""Rotating patch solutions (V-states) of the generalized SQG equation near the disk."""
from .special_functions import Alpha, c_alpha, dispersion_table, lambda_k, omega_k
from .contour import RadialContour
from .functional import QuadratureConfig, eval_F_grid, eval_F_sine, eval_Fi
from .linearization import assemble_jacobian, gateaux
from .continuation import Branch, BranchPoint, SolverConfig, newton_solve, trace_branch
from .evolution import rigid_rotation_error

__all__ = [
    "Alpha", "c_alpha", "dispersion_table", "lambda_k", "omega_k",
    "RadialContour", "QuadratureConfig", "eval_F_grid", "eval_F_sine", "eval_Fi",
    "assemble_jacobian", "gateaux", "Branch", "BranchPoint", "SolverConfig",
    "newton_solve", "trace_branch", "rigid_rotation_error",
]
__version__ = "0.1.0"
