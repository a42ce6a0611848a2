"""Command-line front end: ``reflector-sim {fit,gen-mesh,adjust,evaluate,compare}``."""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import CABIN_RADIUS_MODES, DEFAULT_F_RATIO, DEFAULT_RADIUS, TelescopeConstants
from .errors import InvalidArgumentError, ReflectorError
from .geometry import AzEl, build_rotation
from .mesh import build_mesh, generate_synthetic_mesh, load_nodes, load_panels, save_nodes, save_panels, validate_mesh
from .reception import REGIONS, cabin_circle_csv, compare_reports, evaluate_reception, plot_data_csv
from .shape import export_adjustments, fit_parabola, loss, paraboloid_vertex, solve_proportion

PROG = "reflector-sim"


class StageError(Exception):
    def __init__(self, stage, exc):
        self.stage = stage
        super().__init__(f"[{stage}] {exc}")


@contextmanager
def stage(name):
    try:
        yield
    except (ReflectorError, OSError, ValueError, KeyError) as exc:
        raise StageError(name, exc) from exc


@dataclass
class RunConfig:
    constants: TelescopeConstants
    source: AzEl
    nodes: str | None = None
    panels: str | None = None
    subdivisions: int = 5
    cap: float = 56.3
    full_sphere: bool = False
    out_dir: Path = field(default_factory=lambda: Path("."))
    cabin_radius_mode: str = "diameter-1m"
    region: str = "mixed"
    resolution: float = 1e-3

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        constants = TelescopeConstants(
            R=args.R,
            F_ratio=args.F_ratio,
            aperture_diameter=args.aperture_diameter,
            stroke_limit=args.stroke_limit,
            edge_ratio_limit=args.edge_ratio_limit,
            cabin_radius=CABIN_RADIUS_MODES[args.cabin_radius_mode],
        )
        if not 0 < args.resolution < 1:
            raise InvalidArgumentError(f"--resolution must lie in (0, 1), got {args.resolution}")
        if args.synthetic and (args.nodes or args.panels):
            raise InvalidArgumentError("--synthetic cannot be combined with --nodes/--panels")
        if bool(args.nodes) != bool(args.panels):
            raise InvalidArgumentError("--nodes and --panels must be given together")
        for path in (args.nodes, args.panels):
            if path and not Path(path).is_file():
                raise FileNotFoundError(f"input file not found: {path}")
        return cls(
            constants=constants,
            source=AzEl(args.alpha % 360.0, args.beta),
            nodes=args.nodes,
            panels=args.panels,
            subdivisions=args.subdivisions,
            cap=args.cap,
            full_sphere=args.full_sphere,
            out_dir=Path(args.out_dir),
            cabin_radius_mode=args.cabin_radius_mode,
            region=args.region,
            resolution=args.resolution,
        )


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write_all(out_dir: Path, files: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out_dir / name).write_text(text)


def _load_mesh(cfg: RunConfig):
    if cfg.nodes:
        mesh = build_mesh(load_nodes(cfg.nodes), load_panels(cfg.panels), cfg.constants.R)
    else:
        mesh = generate_synthetic_mesh(cfg.constants.R, cfg.cap, cfg.subdivisions, cfg.full_sphere)
    for v in validate_mesh(mesh, cfg.constants):
        print(f"warning: {v.code} {v.node_or_panel}: {v.message}", file=sys.stderr)
    return mesh


def _solve(cfg: RunConfig):
    with stage("mesh"):
        mesh = _load_mesh(cfg)
    with stage("fit"):
        coeffs = fit_parabola(cfg.constants)
    with stage("frame"):
        frame = build_rotation(cfg.source)
    with stage("adjust"):
        solution = solve_proportion(mesh, coeffs, frame, cfg.constants, cfg.resolution)
        c = cfg.constants
        if solution.max_edge_ratio > c.edge_ratio_limit:
            raise ReflectorError(f"edge-ratio constraint violated: {solution.max_edge_ratio:.6g}")
        if max(map(abs, solution.stroke_range)) > c.stroke_limit:
            raise ReflectorError(f"stroke constraint violated: {solution.stroke_range}")
    return mesh, coeffs, frame, solution


def _solution_json(cfg, coeffs, frame, solution) -> dict:
    out = solution.summary()
    out["source"] = {"alpha": cfg.source.alpha, "beta": cfg.source.beta}
    out["parabola"] = {"a": coeffs.a, "c": coeffs.c}
    out["vertex"] = [float(v) for v in paraboloid_vertex(coeffs, frame)]
    out["rotation"] = [[float(v) for v in row] for row in frame.matrix]
    return out


def cmd_fit(cfg: RunConfig) -> int:
    with stage("fit"):
        coeffs = fit_parabola(cfg.constants)
        value = loss(coeffs, cfg.constants)
    payload = {"a": coeffs.a, "c": coeffs.c, "loss": value, "R": cfg.constants.R, "F": cfg.constants.F}
    _write_all(cfg.out_dir, {"parabola.json": _dump(payload)})
    print(f"a = {coeffs.a:.9g}, c = {coeffs.c:.9g}, loss = {value:.9g}")
    return 0


def cmd_gen_mesh(cfg: RunConfig) -> int:
    with stage("mesh"):
        mesh = generate_synthetic_mesh(cfg.constants.R, cfg.cap, cfg.subdivisions, cfg.full_sphere)
    _write_all(cfg.out_dir, {"nodes.csv": save_nodes(mesh), "panels.csv": save_panels(mesh)})
    print(f"{len(mesh.nodes)} nodes, {len(mesh.panels)} panels, {len(mesh.edges)} edges")
    return 0


def cmd_adjust(cfg: RunConfig) -> int:
    _, coeffs, frame, solution = _solve(cfg)
    _write_all(cfg.out_dir, {
        "result.csv": export_adjustments(solution, frame),
        "solution.json": _dump(_solution_json(cfg, coeffs, frame, solution)),
    })
    lo, hi = solution.stroke_range
    print(f"proportion = {solution.proportion:.6g}, max edge ratio = {solution.max_edge_ratio:.6g}, "
          f"strokes in [{lo:.4f}, {hi:.4f}] m over {solution.aperture_node_count} nodes")
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    mesh, coeffs, frame, solution = _solve(cfg)
    c = cfg.constants
    with stage("reception"):
        sphere = evaluate_reception(mesh, "sphere", frame, c, cfg.region)
        working = evaluate_reception(mesh, solution, frame, c, cfg.region)
        mixed_sphere = evaluate_reception(mesh, "sphere", frame, c, "mixed")
        mixed_working = evaluate_reception(mesh, solution, frame, c, "mixed")
        like_sphere = evaluate_reception(mesh, "sphere", frame, c, "aperture")
        like_working = evaluate_reception(mesh, solution, frame, c, "aperture")
    comparison = {
        "cabin_radius": c.cabin_radius,
        "cabin_radius_mode": cfg.cabin_radius_mode,
        "selected": dict(region=cfg.region, **compare_reports(sphere, working).as_dict()),
        "mixed_regions": dict(sphere_region=mixed_sphere.region, working_region=mixed_working.region,
                            sphere_hits=mixed_sphere.hit_panels, sphere_total=mixed_sphere.total_panels,
                            working_hits=mixed_working.hit_panels, working_total=mixed_working.total_panels,
                            **compare_reports(mixed_sphere, mixed_working).as_dict()),
        "like_for_like": dict(region="aperture",
                              sphere_hits=like_sphere.hit_panels, working_hits=like_working.hit_panels,
                              total=like_sphere.total_panels,
                              **compare_reports(like_sphere, like_working).as_dict()),
    }
    _write_all(cfg.out_dir, {
        "solution.json": _dump(_solution_json(cfg, coeffs, frame, solution)),
        "reception_sphere.json": sphere.to_json() + "\n",
        "reception_working.json": working.to_json() + "\n",
        "comparison.json": _dump(comparison),
        "plot_sphere.csv": plot_data_csv(sphere),
        "plot_working.csv": plot_data_csv(working),
        "cabin_circle.csv": cabin_circle_csv(c.cabin_radius),
    })
    print(f"sphere {sphere.hit_panels}/{sphere.total_panels} = {sphere.efficiency:.4f}, "
          f"working {working.hit_panels}/{working.total_panels} = {working.efficiency:.4f}")
    return 0


def cmd_compare(args) -> int:
    with stage("compare"):
        sphere = json.loads(Path(args.sphere_report).read_text())
        working = json.loads(Path(args.working_report).read_text())
        result = compare_reports(sphere["efficiency"], working["efficiency"]).as_dict()
    _write_all(Path(args.out_dir), {"comparison.json": _dump(result)})
    imp = result["improvement_percent"]
    print("improvement undefined (sphere efficiency is 0)" if imp is None else f"improvement {imp:+.1f}%")
    return 0


def _add_common(p):
    g = p.add_argument_group("telescope constants")
    g.add_argument("--R", type=float, default=DEFAULT_RADIUS, help="reference sphere radius (m)")
    g.add_argument("--F-ratio", dest="F_ratio", type=float, default=DEFAULT_F_RATIO,
                   help="F / R; the focal plane sits at -(R - F)")
    g.add_argument("--aperture-diameter", type=float, default=300.0, help="illuminated aperture (m)")
    g.add_argument("--stroke-limit", type=float, default=0.6, help="actuator stroke limit (m)")
    g.add_argument("--edge-ratio-limit", type=float, default=0.0007, help="max relative edge length change")
    g.add_argument("--cabin-radius-mode", choices=sorted(CABIN_RADIUS_MODES), default="diameter-1m",
                   help="diameter-1m: r = 0.5 m; eq24: r = 1 m")
    g = p.add_argument_group("source and mesh")
    g.add_argument("--alpha", type=float, default=36.795, help="source azimuth (deg)")
    g.add_argument("--beta", type=float, default=78.169, help="source elevation (deg)")
    g.add_argument("--nodes", help="nodes CSV (id,Mx,My,Mz,Dx,Dy,Dz,Ux,Uy,Uz)")
    g.add_argument("--panels", help="panels CSV (id1,id2,id3)")
    g.add_argument("--synthetic", action="store_true", help="use a generated geodesic cap (default without files)")
    g.add_argument("--subdivisions", type=int, default=5, help="icosahedron subdivisions")
    g.add_argument("--cap", type=float, default=56.3, help="cap half angle (deg)")
    g.add_argument("--full-sphere", action="store_true", help="keep the whole sphere, no cap crop")
    g = p.add_argument_group("run")
    g.add_argument("--region", choices=REGIONS, default="mixed",
                   help="panels counted: mixed = all for sphere / aperture for working")
    g.add_argument("--resolution", type=float, default=1e-3, help="bisection resolution on the proportion")
    g.add_argument("--out-dir", default=".", help="output directory")
    g.add_argument("--config", help="JSON file of option defaults; flags override it")


COMMANDS = {
    "fit": (cmd_fit, "fit the ideal parabola"),
    "gen-mesh": (cmd_gen_mesh, "write a synthetic nodes.csv / panels.csv"),
    "adjust": (cmd_adjust, "solve the working surface, write result.csv and solution.json"),
    "evaluate": (cmd_evaluate, "reception of sphere vs working surface"),
}


def _constants_epilog() -> str:
    pairs = ", ".join(f"{k}={v!r}" for k, v in TelescopeConstants().as_dict().items())
    return f"telescope constant defaults: {pairs}"


def build_parser():
    parser = argparse.ArgumentParser(prog=PROG, description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    for name, (_, text) in COMMANDS.items():
        p = sub.add_parser(name, help=text, description=text, epilog=_constants_epilog(),
                           formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        _add_common(p)
        subs[name] = p
    p = sub.add_parser("compare", help="compare two reception report JSON files",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("sphere_report")
    p.add_argument("working_report")
    p.add_argument("--out-dir", default=".", help="output directory")
    subs["compare"] = p
    return parser, subs


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            config = json.loads(Path(args.config).read_text())
            subs[args.command].set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
            args = parser.parse_args(argv)
        if args.command == "compare":
            return cmd_compare(args)
        cfg = RunConfig.from_args(args)
        return COMMANDS[args.command][0](cfg)
    except StageError as exc:
        print(f"{PROG} {args.command}: error {exc}", file=sys.stderr)
        return 1
    except (ReflectorError, OSError, ValueError) as exc:
        print(f"{PROG} {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
