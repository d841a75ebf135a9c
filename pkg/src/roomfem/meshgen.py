"""Tetrahedral mesh generation for prismatic rooms.

The footprint polygon is triangulated by ear clipping, the triangulation
is extruded into layers of prisms, and each prism is split into three
tetrahedra.  Quad faces between neighbouring prisms are split with a
diagonal chosen from the smallest footprint index on the face, which is
a per-face rule, so adjacent prisms always agree and the mesh is
conforming by construction.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _poly2d
from .errors import DegeneratePolygon, NotSimple

logger = logging.getLogger(__name__)

_AREA_EPS = 1e-12


@dataclass(frozen=True)
class TetMesh:
    """Tetrahedral mesh with tagged boundary facets.

    ``vertices`` is (n, 3) float, ``tets`` (m, 4) int with positive
    orientation, ``facets`` (f, 3) int are outward-wound boundary
    triangles and ``facet_tags`` names each one (``FLOOR``, ``CEILING``,
    ``WALL:<k>`` or caller-supplied tags).
    """

    vertices: np.ndarray
    tets: np.ndarray
    facets: np.ndarray
    facet_tags: tuple[str, ...]

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        t = np.ascontiguousarray(np.asarray(self.tets, dtype=np.int64))
        f = np.ascontiguousarray(np.asarray(self.facets, dtype=np.int64))
        tags = tuple(self.facet_tags)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (n, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 4:
            raise ValueError(f"tets must be (m, 4), got {t.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise ValueError(f"facets must be (f, 3), got {f.shape}")
        if len(tags) != len(f):
            raise ValueError("facet_tags must match facets")
        for arr in (t, f):
            if arr.size and (arr.min() < 0 or arr.max() >= len(v)):
                raise ValueError("index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "tets", t)
        object.__setattr__(self, "facets", f)
        object.__setattr__(self, "facet_tags", tags)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_tets(self) -> int:
        return len(self.tets)

    def tags(self) -> list[str]:
        """Distinct facet tags in first-appearance order."""
        seen = dict.fromkeys(self.facet_tags)
        return list(seen)

    def tagged_vertices(self, tag: str) -> np.ndarray:
        """Sorted vertex indices lying on facets with the given tag."""
        rows = [f for f, t in zip(self.facets, self.facet_tags) if t == tag]
        if not rows:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(rows))


def tet_volumes(mesh_or_coords) -> np.ndarray:
    """Signed volumes; accepts a TetMesh or an (m, 4, 3) coordinate array."""
    if isinstance(mesh_or_coords, TetMesh):
        coords = mesh_or_coords.vertices[mesh_or_coords.tets]
    else:
        coords = np.asarray(mesh_or_coords, dtype=float)
    e = coords[..., 1:, :] - coords[..., :1, :]
    return np.linalg.det(e) / 6.0


def _point_in_triangle_strict(p, a, b, c, eps):
    return (_cross2(b - a, p - a) > eps and
            _cross2(c - b, p - b) > eps and
            _cross2(a - c, p - c) > eps)


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def triangulate_footprint(polygon) -> np.ndarray:
    """Ear-clipping triangulation of a simple CCW polygon.

    Returns an (n-2, 3) index array; every triangle is CCW.  Raises
    DegeneratePolygon for repeated vertices, collinear input or clockwise
    orientation, and NotSimple when edges self-intersect.
    """
    pts = np.asarray(polygon, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DegeneratePolygon(f"polygon must be (n, 2), got {pts.shape}")
    n = len(pts)
    if n < 3:
        raise DegeneratePolygon(f"polygon needs at least 3 vertices, got {n}")

    scale = _poly2d.polygon_scale(pts)
    eps = _AREA_EPS * scale * scale
    for i in range(n):
        if np.linalg.norm(pts[i] - pts[(i + 1) % n]) <= 1e-12 * scale:
            raise DegeneratePolygon(f"repeated vertex at index {i}")

    area = _poly2d.signed_area(pts)
    if abs(area) <= eps:
        raise DegeneratePolygon("polygon has zero area")
    if area < 0:
        raise DegeneratePolygon("polygon must be counterclockwise")
    if not _poly2d.is_simple(pts):
        raise NotSimple("polygon edges intersect")

    active = list(range(n))
    triangles = []
    while len(active) > 3:
        m = len(active)
        clipped = False
        for pos in range(m):
            i0, i1, i2 = active[pos - 1], active[pos], active[(pos + 1) % m]
            a, b, c = pts[i0], pts[i1], pts[i2]
            if _cross2(b - a, c - a) <= eps:
                continue  # reflex or flat corner, not an ear
            blocked = any(
                _point_in_triangle_strict(pts[j], a, b, c, -eps)
                for j in active if j not in (i0, i1, i2))
            if blocked:
                continue
            triangles.append((i0, i1, i2))
            del active[pos]
            clipped = True
            break
        if not clipped:
            raise DegeneratePolygon("no ear found; polygon is numerically degenerate")
    i0, i1, i2 = active
    if _cross2(pts[i1] - pts[i0], pts[i2] - pts[i0]) <= eps:
        raise DegeneratePolygon("final triangle has zero area")
    triangles.append((i0, i1, i2))
    return np.array(triangles, dtype=np.int64)


def _boundary_edges(triangles) -> list[tuple[int, int]]:
    """Directed edges of a triangulation whose reverse never appears."""
    directed = set()
    for a, b, c in triangles:
        directed.update([(int(a), int(b)), (int(b), int(c)), (int(c), int(a))])
    return sorted(e for e in directed if (e[1], e[0]) not in directed)


def extrude_triangulation(points, triangles, z_floor: float, z_ceiling: float,
                          layers: int, wall_tags: dict | None = None) -> TetMesh:
    """Extrude a 2D triangulation into ``layers`` sheets of tetrahedra.

    Each prism over a base triangle splits into three tets; all quad
    faces take the diagonal leaving the bottom copy of the smallest
    footprint index, so shared faces agree between neighbours.  Boundary
    facets are tagged FLOOR / CEILING / wall_tags[(a, b)] where (a, b) is
    the directed boundary edge; edges missing from ``wall_tags`` get
    WALL:<i> in sorted edge order.
    """
    pts = np.asarray(points, dtype=float)
    tris = np.asarray(triangles, dtype=np.int64)
    if layers < 1:
        raise ValueError("layers must be >= 1")
    if z_ceiling <= z_floor:
        raise ValueError("z_ceiling must be above z_floor")
    npts = len(pts)

    z = np.linspace(z_floor, z_ceiling, layers + 1)
    vertices = np.column_stack([
        np.tile(pts[:, 0], layers + 1),
        np.tile(pts[:, 1], layers + 1),
        np.repeat(z, npts),
    ])

    srt = np.sort(tris, axis=1)  # p < q < r per triangle
    p, q, r = srt[:, 0], srt[:, 1], srt[:, 2]
    tets = []
    for layer in range(layers):
        bot = layer * npts
        top = bot + npts
        tets.append(np.column_stack([bot + p, bot + q, bot + r, top + r]))
        tets.append(np.column_stack([bot + p, bot + q, top + q, top + r]))
        tets.append(np.column_stack([bot + p, top + p, top + q, top + r]))
    tets = np.vstack(tets)

    # orientation fix-up: sorting the base indices loses CCW order,
    # so swap the last two indices wherever the signed volume is negative
    vols = tet_volumes(vertices[tets])
    flip = vols < 0
    tets[flip, 2], tets[flip, 3] = tets[flip, 3], tets[flip, 2].copy()

    facets = []
    tags = []
    top_off = layers * npts
    for a, b, c in tris:
        facets.append((a, c, b))  # floor faces down
        tags.append("FLOOR")
    for a, b, c in tris:
        facets.append((top_off + a, top_off + b, top_off + c))
        tags.append("CEILING")

    edges = _boundary_edges(tris)
    if wall_tags is None:
        wall_tags = {e: f"WALL:{i}" for i, e in enumerate(edges)}
    for a, b in edges:
        try:
            tag = wall_tags[(a, b)]
        except KeyError:
            raise ValueError(f"no wall tag for boundary edge ({a}, {b})") from None
        for layer in range(layers):
            ba, bb = layer * npts + a, layer * npts + b
            ta, tb = ba + npts, bb + npts
            if a < b:  # diagonal from the smaller footprint index
                quad = [(ba, bb, tb), (ba, tb, ta)]
            else:
                quad = [(ba, bb, ta), (bb, tb, ta)]
            facets.extend(quad)
            tags.extend([tag, tag])

    mesh = TetMesh(vertices=vertices, tets=tets,
                   facets=np.array(facets, dtype=np.int64),
                   facet_tags=tuple(tags))
    logger.debug("extruded %d layers: %d vertices, %d tets, %d facets",
                 layers, mesh.num_vertices, mesh.num_tets, len(facets))
    return mesh


def extrude_to_tets(space, target_h: float) -> TetMesh:
    """Mesh a Space at roughly the requested resolution.

    The layer count is the room height divided by ``target_h`` rounded
    to the nearest integer, never below one.  Wall facets over footprint
    edge k (vertex k to k+1) are tagged WALL:k.
    """
    if target_h <= 0:
        raise ValueError("target_h must be positive")
    tris = triangulate_footprint(space.footprint)
    n = len(space.footprint)
    layers = max(1, round(space.height / target_h))
    wall_tags = {(k, (k + 1) % n): f"WALL:{k}" for k in range(n)}
    return extrude_triangulation(space.footprint, tris, space.z_floor,
                                 space.z_ceiling, layers, wall_tags)


def dihedral_angles(mesh: TetMesh) -> np.ndarray:
    """Interior dihedral angles in degrees, shape (num_tets, 6)."""
    coords = mesh.vertices[mesh.tets]
    # outward normal of the face opposite vertex i
    opposite = [(1, 2, 3), (0, 3, 2), (0, 1, 3), (0, 2, 1)]
    normals = np.empty((len(coords), 4, 3))
    for i, (a, b, c) in enumerate(opposite):
        nrm = np.cross(coords[:, b] - coords[:, a], coords[:, c] - coords[:, a])
        normals[:, i] = nrm / np.linalg.norm(nrm, axis=1, keepdims=True)
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    angles = np.empty((len(coords), 6))
    for k, (i, j) in enumerate(pairs):
        cosang = np.clip(np.einsum("td,td->t", normals[:, i], normals[:, j]), -1.0, 1.0)
        angles[:, k] = 180.0 - np.degrees(np.arccos(cosang))
    return angles


def radius_edge_ratios(mesh: TetMesh) -> np.ndarray:
    """Circumradius over shortest edge for every tet."""
    coords = mesh.vertices[mesh.tets]
    v0 = coords[:, 0]
    rhs = 0.5 * (np.einsum("tid,tid->ti", coords[:, 1:], coords[:, 1:])
                 - np.einsum("td,td->t", v0, v0)[:, None])
    mat = coords[:, 1:] - v0[:, None, :]
    centers = np.linalg.solve(mat, rhs[..., None])[..., 0]
    radii = np.linalg.norm(centers - v0, axis=1)
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    edges = np.stack([np.linalg.norm(coords[:, i] - coords[:, j], axis=1)
                      for i, j in pairs], axis=1)
    return radii / edges.min(axis=1)


@dataclass(frozen=True)
class MeshQuality:
    min_dihedral: float
    max_dihedral: float
    max_aspect: float
    min_volume: float
    total_volume: float
    num_tets: int
    num_vertices: int

    def as_dict(self) -> dict:
        return {
            "min_dihedral": self.min_dihedral,
            "max_dihedral": self.max_dihedral,
            "max_aspect": self.max_aspect,
            "min_volume": self.min_volume,
            "total_volume": self.total_volume,
            "num_tets": self.num_tets,
            "num_vertices": self.num_vertices,
        }


def mesh_quality(mesh: TetMesh) -> MeshQuality:
    """Shape statistics: worst dihedral angles, radius-edge aspect, volumes."""
    angles = dihedral_angles(mesh)
    vols = tet_volumes(mesh)
    return MeshQuality(
        min_dihedral=float(angles.min()),
        max_dihedral=float(angles.max()),
        max_aspect=float(radius_edge_ratios(mesh).max()),
        min_volume=float(vols.min()),
        total_volume=float(vols.sum()),
        num_tets=mesh.num_tets,
        num_vertices=mesh.num_vertices,
    )
