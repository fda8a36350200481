"""Command-line front end: dispersion tables, linear checks, branches, evolution, norms.

Exit status 0 on success, 1 on usage or IO errors, 2 when the result is
partial or a check fails (a diagnostic goes to stderr).
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from .continuation import ConvergenceError, SolverConfig, bifurcation_point, load_branch, dumps_branch, trace_branch
from .contour import NotStarShapedError, RadialContour, decay_report, default_grid_points, sobolev_norm, xlog_norm
from .functional import QuadratureConfig, sine_project
from .linearization import assemble_jacobian, cos_basis, d_omega
from .evolution import rigid_rotation_error
from .special_functions import dispersion_table, omega_k

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 1.0
    m: int = 3
    n_modes: int = 32
    grid_points: int = 256
    quad_nodes: int = 2048
    newton_tol: float = 1e-10
    ds: float = 1e-3
    s_max: float = 2e-2
    dt: float | None = None
    t_final: float | None = None
    output: str | None = None
    k_max: int = 16
    omega: float = 0.0
    evolve_modes: int = 12

    def solver(self) -> SolverConfig:
        return SolverConfig(self.n_modes, self.grid_points, self.quad_nodes, self.newton_tol)


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _convert(name: str, text: str):
    default = _FIELDS[name].default
    if text.lower() in ("none", ""):
        return None
    if name == "output":
        return text
    if isinstance(default, int) and not isinstance(default, bool):
        return int(text)
    return float(text)


def read_config_file(path: str) -> dict:
    """key=value lines; '#' starts a comment; keys may use '-' or '_'."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{n}: expected key=value")
            key, val = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _FIELDS:
                raise ValueError(f"{path}:{n}: unknown key {key!r}")
            out[key] = _convert(key, val)
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags take precedence")
    for name, f in _FIELDS.items():
        common.add_argument("--" + name.replace("_", "-"), dest=name, default=None,
                            type=lambda t, n=name: _convert(n, t))
    p = _Parser(prog="gsqg-vstates", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("dispersion", parents=[common], help="table of Omega_k, k = 1..k_max")
    sub.add_parser("check-linear", parents=[common], help="Jacobian at the disk vs the dispersion law")
    sub.add_parser("branch", parents=[common], help="trace the m-fold branch")
    ev = sub.add_parser("evolve", parents=[common], help="rigid-rotation check of a branch point")
    ev.add_argument("--branch-file", required=True)
    ev.add_argument("--index", type=int, default=0)
    nm = sub.add_parser("norms", parents=[common], help="norms and coefficient decay of a contour")
    nm.add_argument("--branch-file")
    nm.add_argument("--index", type=int, default=0)
    nm.add_argument("--contour-file", help="file holding one contour record")
    nm.add_argument("--k", type=int, default=2, help="Sobolev / log-weighted order")
    return p


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    return replace(RunConfig(), **values)


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_dispersion(cfg: RunConfig) -> int:
    table = dispersion_table(cfg.alpha, cfg.k_max)
    _emit("k,omega\n" + "".join(f"{k},{w:.17g}\n" for k, w in table.entries), cfg.output)
    return EXIT_OK


def _linear_report(cfg: RunConfig):
    disk = RadialContour.disk(cfg.m, cfg.n_modes)
    quad = QuadratureConfig(cfg.quad_nodes)
    J = assemble_jacobian(cfg.omega, disk, cfg.alpha, quad, n_points=_grid(cfg, disk))
    Jf = assemble_jacobian(cfg.omega, disk, cfg.alpha, quad.doubled(), n_points=_grid(cfg, disk))
    ks = disk.frequencies
    expect = np.array([-k * (cfg.omega - omega_k(cfg.alpha, int(k))) for k in ks])
    diag = J.diagonal()
    scale = max(float(np.max(np.abs(expect))), 1e-300)
    rel = np.abs(diag - expect) / np.maximum(np.abs(expect), scale * 1e-12)
    off = J.off_diagonal_max() / max(float(np.max(np.abs(diag))), 1e-300)
    refine = float(np.max(np.abs(Jf.matrix - J.matrix))) / scale
    om_m = bifurcation_point(cfg.alpha, cfg.m)
    Jm = assemble_jacobian(om_m, disk, cfg.alpha, quad, n=1, n_points=_grid(cfg, disk))
    kernel = float(np.max(np.abs(Jm.matrix[:, 0])))
    # mixed derivative along cos(m x): the mode-m sine coefficient of h'
    npts = _grid(cfg, disk)
    transversality = float(sine_project(d_omega(cos_basis(disk, 1), npts), cfg.m, 1).coeffs[0])
    return dict(ks=ks, diag=diag, expect=expect, rel=rel, off=off, refine=refine,
                kernel=kernel, transversality=transversality)


def _grid(cfg: RunConfig, contour: RadialContour) -> int:
    return default_grid_points(contour, cfg.grid_points)


def cmd_check_linear(cfg: RunConfig) -> int:
    r = _linear_report(cfg)
    ok_diag = float(np.max(r["rel"])) < 1e-6
    ok_off = r["off"] < 1e-8
    ok_ref = r["refine"] < 1e-8
    ok_ker = r["kernel"] < 1e-8
    lines = [f"# alpha={cfg.alpha:.17g} m={cfg.m} n_modes={cfg.n_modes} quad_nodes={cfg.quad_nodes} omega={cfg.omega:.17g}",
             "mode,diagonal,expected,rel_error"]
    for k, d, e, q in zip(r["ks"], r["diag"], r["expect"], r["rel"]):
        lines.append(f"{k},{d:.17g},{e:.17g},{q:.3e}")
    lines += [
        f"max_diagonal_rel_error,{np.max(r['rel']):.3e},{'PASS' if ok_diag else 'FAIL'}",
        f"off_diagonal_ratio,{r['off']:.3e},{'PASS' if ok_off else 'FAIL'}",
        f"refinement_change,{r['refine']:.3e},{'PASS' if ok_ref else 'FAIL refinement'}",
        f"kernel_column_at_omega_m,{r['kernel']:.3e},{'PASS' if ok_ker else 'FAIL'}",
        f"transversality,{r['transversality']:.17g},{'PASS' if r['transversality'] != 0 else 'FAIL'}",
    ]
    passed = ok_diag and ok_off and ok_ref and ok_ker
    lines.append("RESULT," + ("PASS" if passed else "FAIL"))
    _emit("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK if passed else EXIT_PARTIAL


def cmd_branch(cfg: RunConfig) -> int:
    branch = trace_branch(cfg.alpha, cfg.m, cfg.s_max, cfg.ds, cfg.solver())
    _emit(dumps_branch(branch), cfg.output)
    if branch.diagnostic:
        print(f"partial branch ({len(branch.points)} points): {branch.diagnostic}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_evolve(cfg: RunConfig, branch_file: str, index: int) -> int:
    branch = load_branch(branch_file)
    if not 0 <= index < len(branch.points):
        raise IndexError(f"index {index} out of range: the branch has {len(branch.points)} points")
    point = branch.points[index]
    t_final = cfg.t_final
    if t_final is None:
        t_final = math.pi / (2 * abs(point.omega)) if point.omega else 1.0
    rep = rigid_rotation_error(point, t_final, cfg.dt, n_modes=min(cfg.evolve_modes, point.contour.n_modes),
                               quad=QuadratureConfig(cfg.quad_nodes))
    _emit(rep.to_csv(), cfg.output)
    print(f"s={point.s:.6g} omega={point.omega:.17g} t_final={t_final:.6g} steps={rep.steps} "
          f"dt={rep.dt:.6g} max_error={rep.max_error:.3e} area_drift={rep.area_drift:.3e}",
          file=sys.stderr if cfg.output is None else sys.stdout)
    return EXIT_OK


def cmd_norms(cfg: RunConfig, args) -> int:
    if args.contour_file:
        with open(args.contour_file, encoding="utf-8") as fh:
            contour = RadialContour.from_record(fh.read())
    elif args.branch_file:
        pts = load_branch(args.branch_file).points
        if not 0 <= args.index < len(pts):
            raise IndexError(f"index {args.index} out of range: the branch has {len(pts)} points")
        contour = pts[args.index].contour
    else:
        raise ValueError("norms needs --contour-file or --branch-file")
    lines = [f"sobolev_norm_{k},{sobolev_norm(contour, k):.17g}" for k in range(args.k + 1)]
    if contour.is_even:
        lines.append(f"xlog_norm_{args.k},{xlog_norm(contour, args.k):.17g}")
    rep = decay_report(contour)
    lines.append(f"decay_ratio,{'nan' if rep.ratio is None else format(rep.ratio, '.17g')}")
    lines.append("mode,magnitude")
    lines += [f"{j},{v:.17g}" for j, v in rep.entries]
    _emit("\n".join(lines) + "\n", cfg.output)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "dispersion":
            return cmd_dispersion(cfg)
        if args.command == "check-linear":
            return cmd_check_linear(cfg)
        if args.command == "branch":
            return cmd_branch(cfg)
        if args.command == "evolve":
            return cmd_evolve(cfg, args.branch_file, args.index)
        return cmd_norms(cfg, args)
    except (ConvergenceError, NotStarShapedError, RuntimeError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except (OSError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
