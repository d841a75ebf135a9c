"""Readers and writers for scans, spaces, meshes, problems and solutions.

Scan input is ASCII PLY or OBJ.  Everything else is JSON carrying a
``"schema": "roomfem/v1"`` marker; writers are deterministic, so equal
inputs serialize to identical bytes and every document round-trips
exactly.  Solutions can additionally be exported as legacy ASCII VTK
unstructured grids for external viewers.
"""

import hashlib
import json
import logging

import numpy as np

from .errors import LengthMismatch, ParseError, UnsupportedFormat
from .fem import PointSource, PoissonProblem, SolutionField
from .geometry import Space, SurfaceMesh
from .meshgen import TetMesh

logger = logging.getLogger(__name__)

SCHEMA = "roomfem/v1"

_DEGENERATE_AREA = 1e-12


# --- surface scans ----------------------------------------------------------

def read_surface_scan(data, fmt: str) -> SurfaceMesh:
    """Parse scan bytes in the given format (``"ply"`` or ``"obj"``).

    Polygonal faces are fan-triangulated from their first vertex and
    triangles with area at or below 1e-12 are dropped.  Raises
    ParseError (naming the line) for malformed input and
    UnsupportedFormat for unknown formats or binary PLY.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8", errors="replace")
    else:
        text = str(data)
    fmt = fmt.lower().lstrip(".")
    if fmt == "ply":
        verts, faces = _parse_ply(text)
    elif fmt == "obj":
        verts, faces = _parse_obj(text)
    else:
        raise UnsupportedFormat(f"unknown scan format {fmt!r}; use 'ply' or 'obj'")

    tris = []
    for face, line in faces:
        for k in range(1, len(face) - 1):
            tris.append((face[0], face[k], face[k + 1]))
    verts = np.asarray(verts, dtype=float).reshape(-1, 3)
    tris = np.asarray(tris, dtype=np.int64).reshape(-1, 3)

    dropped = 0
    if len(tris):
        p = verts[tris]
        areas = 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
        keep = areas > _DEGENERATE_AREA
        dropped = int((~keep).sum())
        tris = tris[keep]
    if dropped:
        logger.info("dropped %d degenerate triangles from scan", dropped)
    return SurfaceMesh(vertices=verts, triangles=tris)


def _parse_ply(text: str):
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError("not a PLY file (missing 'ply' magic)", 1)

    elements = []  # (name, count, properties) in declaration order
    lineno = 1
    in_header = True
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts or parts[0] in ("comment", "obj_info"):
            continue
        if parts[0] == "format":
            if len(parts) < 2 or parts[1] != "ascii":
                raise UnsupportedFormat(
                    f"PLY format {' '.join(parts[1:2])!r} is not supported; "
                    "only ascii 1.0")
        elif parts[0] == "element":
            if len(parts) != 3:
                raise ParseError("malformed element declaration", lineno)
            try:
                count = int(parts[2])
            except ValueError:
                raise ParseError(f"bad element count {parts[2]!r}", lineno) from None
            elements.append([parts[1], count, []])
        elif parts[0] == "property":
            if not elements:
                raise ParseError("property before any element", lineno)
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[-1]))
            else:
                elements[-1][2].append(("scalar", parts[-1]))
        elif parts[0] == "end_header":
            in_header = False
            break
        else:
            raise ParseError(f"unknown header keyword {parts[0]!r}", lineno)
    if in_header:
        raise ParseError("header never ends (missing end_header)", lineno)

    verts: list[tuple[float, float, float]] = []
    faces = []
    body = lineno + 1
    rows = [(i, raw.split()) for i, raw in enumerate(lines[body - 1:], start=body)
            if raw.strip()]
    cursor = 0
    for name, count, props in elements:
        scalar_names = [p[1] for p in props if p[0] == "scalar"]
        for _ in range(count):
            if cursor >= len(rows):
                raise ParseError(
                    f"unexpected end of file: element '{name}' declares {count} "
                    "rows but the data ran out", len(lines))
            lineno, parts = rows[cursor]
            cursor += 1
            if name == "vertex":
                if len(parts) < len(scalar_names):
                    raise ParseError(
                        f"vertex row has {len(parts)} values, expected "
                        f"{len(scalar_names)}", lineno)
                try:
                    rec = {k: float(v) for k, v in zip(scalar_names, parts)}
                    verts.append((rec["x"], rec["y"], rec["z"]))
                except (ValueError, KeyError):
                    raise ParseError("vertex row is not numeric x y z", lineno) from None
            elif name == "face":
                try:
                    k = int(parts[0])
                    idx = [int(t) for t in parts[1:1 + k]]
                except (ValueError, IndexError):
                    raise ParseError("face row is not a valid index list", lineno) from None
                if len(idx) != k:
                    raise ParseError(
                        f"face declares {k} indices but has {len(idx)}", lineno)
                if any(i < 0 or i >= len(verts) for i in idx):
                    raise ParseError("face references a vertex out of range", lineno)
                if k >= 3:
                    faces.append((idx, lineno))
            # other elements are skipped row by row
    return verts, faces


def _parse_obj(text: str):
    verts: list[tuple[float, float, float]] = []
    faces = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            if len(parts) < 4:
                raise ParseError("vertex line needs 3 coordinates", lineno)
            try:
                verts.append(tuple(float(t) for t in parts[1:4]))
            except ValueError:
                raise ParseError("vertex coordinates are not numeric", lineno) from None
        elif parts[0] == "f":
            idx = []
            for token in parts[1:]:
                head = token.split("/")[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ParseError(f"bad face index {token!r}", lineno) from None
                i = i - 1 if i > 0 else len(verts) + i
                if i < 0 or i >= len(verts):
                    raise ParseError("face references a vertex out of range", lineno)
                idx.append(i)
            if len(idx) >= 3:
                faces.append((idx, lineno))
        # everything else (vn, vt, o, g, s, usemtl, ...) is ignored
    return verts, faces


def write_surface_scan(mesh: SurfaceMesh) -> bytes:
    """Serialize a surface mesh as ASCII PLY."""
    out = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(mesh.vertices)}",
        "property double x",
        "property double y",
        "property double z",
        f"element face {len(mesh.triangles)}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    out.extend(" ".join(repr(c) for c in row) for row in mesh.vertices.tolist())
    out.extend(f"3 {a} {b} {c}" for a, b, c in mesh.triangles.tolist())
    return ("\n".join(out) + "\n").encode("utf-8")


# --- JSON documents ---------------------------------------------------------

def _dump(doc: dict) -> bytes:
    return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")


def _load(data) -> dict:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    if doc.get("schema") != SCHEMA:
        raise ParseError(f"unsupported schema {doc.get('schema')!r}, "
                         f"expected {SCHEMA!r}")
    return doc


def _require(doc: dict, key: str):
    try:
        return doc[key]
    except KeyError:
        raise ParseError(f"missing required key {key!r}") from None


def write_space(space: Space) -> bytes:
    return _dump({
        "schema": SCHEMA,
        "footprint": space.footprint.tolist(),
        "z_floor": float(space.z_floor),
        "z_ceiling": float(space.z_ceiling),
    })


def read_space(data) -> Space:
    doc = _load(data)
    try:
        return Space(footprint=np.asarray(_require(doc, "footprint"), dtype=float),
                     z_floor=float(_require(doc, "z_floor")),
                     z_ceiling=float(_require(doc, "z_ceiling")))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad space document: {exc}") from None


def write_mesh(mesh: TetMesh) -> bytes:
    return _dump({
        "schema": SCHEMA,
        "vertices": mesh.vertices.tolist(),
        "tets": mesh.tets.tolist(),
        "boundary": [{"tri": f, "tag": t}
                     for f, t in zip(mesh.facets.tolist(), mesh.facet_tags)],
    })


def read_mesh(data) -> TetMesh:
    doc = _load(data)
    boundary = _require(doc, "boundary")
    try:
        facets = [entry["tri"] for entry in boundary]
        tags = tuple(str(entry["tag"]) for entry in boundary)
        return TetMesh(vertices=np.asarray(_require(doc, "vertices"), dtype=float),
                       tets=np.asarray(_require(doc, "tets"), dtype=np.int64),
                       facets=np.asarray(facets, dtype=np.int64).reshape(-1, 3),
                       facet_tags=tags)
    except (TypeError, ValueError, KeyError) as exc:
        raise ParseError(f"bad mesh document: {exc}") from None


def mesh_checksum(mesh: TetMesh) -> str:
    """Stable content hash of the canonical mesh serialization."""
    return "sha256:" + hashlib.sha256(write_mesh(mesh)).hexdigest()


def write_problem(problem: PoissonProblem) -> bytes:
    return _dump({
        "schema": SCHEMA,
        "sources": [{"position": list(map(float, s.position)),
                     "strength": float(s.strength)} for s in problem.sources],
        "dirichlet": {str(k): float(v) for k, v in problem.dirichlet.items()},
    })


def read_problem(data) -> PoissonProblem:
    doc = _load(data)
    try:
        sources = tuple(
            PointSource(position=tuple(float(c) for c in s["position"]),
                        strength=float(s["strength"]))
            for s in _require(doc, "sources"))
        if any(len(s.position) != 3 for s in sources):
            raise ValueError("source positions must have 3 coordinates")
        dirichlet = {str(k): float(v)
                     for k, v in _require(doc, "dirichlet").items()}
        return PoissonProblem(sources=sources, dirichlet=dirichlet)
    except (TypeError, ValueError, KeyError, AttributeError) as exc:
        raise ParseError(f"bad problem document: {exc}") from None


# --- solution export --------------------------------------------------------

class SolutionExport:
    """Parsed solution document: nodal values plus provenance.

    ``mesh_checksum`` ties the values back to the mesh they were
    computed on; ``field`` rebuilds the in-memory SolutionField.
    """

    def __init__(self, vertices, values, vmin, vmax, checksum):
        self.vertices = np.asarray(vertices, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.min = float(vmin)
        self.max = float(vmax)
        self.mesh_checksum = str(checksum)

    @property
    def field(self) -> SolutionField:
        return SolutionField(values=self.values, min=self.min, max=self.max)


def write_solution(mesh: TetMesh, field: SolutionField, fmt: str = "json") -> bytes:
    """Serialize a nodal field over a mesh as JSON or legacy ASCII VTK.

    Raises LengthMismatch when the field does not have one value per
    mesh vertex.
    """
    values = np.asarray(field.values, dtype=float)
    if len(values) != mesh.num_vertices:
        raise LengthMismatch(
            f"field has {len(values)} values for {mesh.num_vertices} vertices")
    fmt = fmt.lower()
    if fmt == "json":
        return _dump({
            "schema": SCHEMA,
            "vertices": mesh.vertices.tolist(),
            "values": values.tolist(),
            "min": float(values.min()),
            "max": float(values.max()),
            "mesh_checksum": mesh_checksum(mesh),
        })
    if fmt in ("vtk", "vtk_legacy"):
        return _write_vtk(mesh, values)
    raise UnsupportedFormat(f"unknown solution format {fmt!r}; use 'json' or 'vtk'")


def read_solution(data) -> SolutionExport:
    doc = _load(data)
    try:
        export = SolutionExport(
            vertices=_require(doc, "vertices"),
            values=_require(doc, "values"),
            vmin=_require(doc, "min"),
            vmax=_require(doc, "max"),
            checksum=_require(doc, "mesh_checksum"),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad solution document: {exc}") from None
    if len(export.vertices) != len(export.values):
        raise ParseError("vertices and values disagree in length")
    return export


def _write_vtk(mesh: TetMesh, values: np.ndarray) -> bytes:
    out = [
        "# vtk DataFile Version 3.0",
        "roomfem solution",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.num_vertices} double",
    ]
    out.extend(" ".join(repr(c) for c in row) for row in mesh.vertices.tolist())
    out.append(f"CELLS {mesh.num_tets} {5 * mesh.num_tets}")
    out.extend("4 " + " ".join(map(str, row)) for row in mesh.tets.tolist())
    out.append(f"CELL_TYPES {mesh.num_tets}")
    out.extend(["10"] * mesh.num_tets)
    out.append(f"POINT_DATA {mesh.num_vertices}")
    out.append("SCALARS u double 1")
    out.append("LOOKUP_TABLE default")
    out.extend(repr(v) for v in values.tolist())
    return ("\n".join(out) + "\n").encode("utf-8")
