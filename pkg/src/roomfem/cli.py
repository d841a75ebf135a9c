"""Command line interface.

Exit codes: 0 on success, 1 on domain errors (the error class name is
printed to stderr), 2 on usage errors (argparse).
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from . import geometry, io, meshgen, synth
from .errors import RoomFemError
from .fem import solve_poisson


def _cmd_synth_scan(args) -> int:
    if args.room == "box":
        scan = synth.box_scan(args.width, args.depth, args.height,
                              spacing=args.spacing, noise=args.noise,
                              seed=args.seed)
    else:
        footprint = synth.regular_polygon(args.sides, args.radius)
        scan = synth.polygon_scan(footprint, args.height, spacing=args.spacing,
                                  noise=args.noise, seed=args.seed)
    Path(args.output).write_bytes(io.write_surface_scan(scan))
    print(f"wrote {args.output}: {len(scan.vertices)} vertices, "
          f"{len(scan.triangles)} triangles")
    return 0


def _scan_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return Path(path).suffix.lstrip(".").lower() or "ply"


def _cmd_extract_planes(args) -> int:
    data = Path(args.scan).read_bytes()
    scan = io.read_surface_scan(data, _scan_format(args.scan, args.format))
    planes = geometry.extract_planes(scan, dist_tol=args.dist_tol,
                                     angle_tol=args.angle_tol,
                                     min_area=args.min_area,
                                     max_planes=args.max_planes, seed=args.seed)
    classified = geometry.classify_planes(planes, angle_tol=args.angle_tol)
    space = geometry.build_space(classified)
    Path(args.output).write_bytes(io.write_space(space))
    for i, p in enumerate(planes):
        n = p.normal
        print(f"plane {i}: normal ({n[0]:+.3f}, {n[1]:+.3f}, {n[2]:+.3f}) "
              f"offset {p.offset:+.3f} area {p.inlier_area:.2f} m^2")
    print(f"footprint: {len(space.footprint)} vertices, "
          f"area {space.area():.3f} m^2, "
          f"z {space.z_floor:.3f}..{space.z_ceiling:.3f}")
    print(f"wrote {args.output}")
    return 0


def _cmd_mesh(args) -> int:
    space = io.read_space(Path(args.space).read_bytes())
    mesh = meshgen.extrude_to_tets(space, args.target_h)
    Path(args.output).write_bytes(io.write_mesh(mesh))
    quality = meshgen.mesh_quality(mesh)
    print(f"mesh: {mesh.num_vertices} vertices, {mesh.num_tets} tets")
    print(f"quality: min dihedral {quality.min_dihedral:.2f} deg, "
          f"max aspect {quality.max_aspect:.3f}, "
          f"volume {quality.total_volume:.6f} m^3")
    print(f"wrote {args.output}")
    return 0


def _cmd_solve(args) -> int:
    mesh = io.read_mesh(Path(args.mesh).read_bytes())
    problem = io.read_problem(Path(args.problem).read_bytes())
    field = solve_poisson(mesh, problem, tol=args.tol, max_iter=args.max_iter)
    Path(args.output).write_bytes(io.write_solution(mesh, field))
    print(f"solution: min {field.min:.6g}, max {field.max:.6g}")
    print(f"wrote {args.output}")
    if args.vtk:
        Path(args.vtk).write_bytes(io.write_solution(mesh, field, fmt="vtk"))
        print(f"wrote {args.vtk}")
    return 0


def _cmd_report(args) -> int:
    from . import report  # defer matplotlib import

    mesh = io.read_mesh(Path(args.mesh).read_bytes())
    written = report.mesh_report(mesh, args.output)
    if args.solution:
        export = io.read_solution(Path(args.solution).read_bytes())
        written += report.solution_report(mesh, export.field, args.output)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    from . import service

    service.run(port=args.port, persist_dir=args.persist)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roomfem",
        description="Reconstruct a room from a surface scan, mesh it and "
                    "solve Poisson problems on it.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-scan", help="generate a synthetic room scan")
    p.add_argument("--room", choices=("box", "poly"), default="box")
    p.add_argument("--width", type=float, default=4.0, help="box width [m]")
    p.add_argument("--depth", type=float, default=3.0, help="box depth [m]")
    p.add_argument("--height", type=float, default=2.5, help="room height [m]")
    p.add_argument("--sides", type=int, default=5, help="poly room side count")
    p.add_argument("--radius", type=float, default=2.0, help="poly room radius [m]")
    p.add_argument("--spacing", type=float, default=0.25, help="scan grid spacing [m]")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma [m]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, metavar="SCAN.PLY")
    p.set_defaults(func=_cmd_synth_scan)

    p = sub.add_parser("extract-planes",
                       help="extract planes from a scan and write the space")
    p.add_argument("scan", help="PLY or OBJ scan file")
    p.add_argument("--format", choices=("ply", "obj"),
                   help="override format detection from the file suffix")
    p.add_argument("--dist-tol", type=float, default=0.03,
                   help="inlier distance tolerance [m]")
    p.add_argument("--angle-tol", type=float, default=10.0,
                   help="normal angle tolerance [deg]")
    p.add_argument("--min-area", type=float, default=0.5,
                   help="minimum plane support area [m^2]")
    p.add_argument("--max-planes", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, metavar="SPACE.JSON")
    p.set_defaults(func=_cmd_extract_planes)

    p = sub.add_parser("mesh", help="mesh a space into tetrahedra")
    p.add_argument("space", metavar="SPACE.JSON")
    p.add_argument("--target-h", type=float, required=True,
                   help="target layer height [m]")
    p.add_argument("-o", "--output", required=True, metavar="MESH.JSON")
    p.set_defaults(func=_cmd_mesh)

    p = sub.add_parser("solve", help="solve a Poisson problem on a mesh")
    p.add_argument("mesh", metavar="MESH.JSON")
    p.add_argument("problem", metavar="PROBLEM.JSON")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("-o", "--output", required=True, metavar="SOLUTION.JSON")
    p.add_argument("--vtk", metavar="SOLUTION.VTK",
                   help="also write a legacy VTK file for external viewers")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("report", help="render quality and solution figures")
    p.add_argument("mesh", metavar="MESH.JSON")
    p.add_argument("--solution", metavar="SOLUTION.JSON")
    p.add_argument("-o", "--output", required=True, metavar="OUTDIR")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=None,
                   help="port (default: ROOMFEM_PORT or 8080)")
    p.add_argument("--persist", metavar="DIR",
                   help="directory for session persistence")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("ROOMFEM_LOG", "WARNING"))
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RoomFemError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        name = getattr(exc, "filename", None)
        detail = exc.strerror or str(exc)
        print(f"cannot access {name!r}: {detail}" if name else detail,
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
