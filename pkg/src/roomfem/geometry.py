"""Room reconstruction from triangulated surface scans.

The pipeline has three steps:

1. ``extract_planes``  -- seeded RANSAC over scan triangles with
   area-weighted least-squares refinement.
2. ``classify_planes`` -- split the planes into floor, ceiling and walls
   relative to an up direction.
3. ``build_space``     -- intersect the inward wall half-planes into a
   convex footprint polygon and attach the floor/ceiling heights.

Plane normals follow the scan winding, which an indoor scan orients
toward the room interior, so the extracted normals point inward and the
room is the intersection of the half-spaces ``normal . x >= offset``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _poly2d
from .errors import (
    EmptyFootprint,
    EmptyScan,
    MissingCeiling,
    MissingFloor,
    NoPlanesFound,
    TooFewWalls,
    UnboundedFootprint,
)

logger = logging.getLogger(__name__)

_TRIALS_PER_ROUND = 32
_MAX_REFINE = 10
_CLIP_EXTENT = 1e6      # half-size of the seed square for half-plane clipping
_WALL_MATCH_TOL = 1e-6  # how close a footprint edge must sit to its wall line


@dataclass(frozen=True)
class SurfaceMesh:
    """Triangle soup from a scan: ``vertices`` (n, 3) and ``triangles`` (m, 3)."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (n, 3), got {v.shape}")
        if t.size == 0:
            t = t.reshape(0, 3)
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError(f"triangles must be (m, 3), got {t.shape}")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle indices out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)


@dataclass(frozen=True, eq=False)
class Plane:
    """Oriented plane ``normal . x = offset`` with its scan support.

    ``inlier_area`` is the total area of supporting triangles and
    ``inlier_count`` their number; ``inliers`` holds their indices into
    the scan's triangle array.  Planes compare by identity: two separate
    extractions never yield "the same" plane object.
    """

    normal: np.ndarray
    offset: float
    inlier_area: float
    inlier_count: int
    inliers: np.ndarray = field(default=None, repr=False, compare=False)

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.normal - self.offset

    def height_along(self, up: np.ndarray) -> float:
        """Intersection height of the plane with the axis through the origin along ``up``."""
        c = float(self.normal @ up)
        if abs(c) < 1e-12:
            raise ValueError("plane is parallel to the up direction")
        return self.offset / c


@dataclass(frozen=True)
class ClassifiedPlanes:
    """Planes split by role. ``walls`` are ordered by azimuth of the inward normal."""

    floor: Plane
    ceiling: Plane
    walls: list[Plane]
    discarded: list[Plane]
    up: np.ndarray


@dataclass(frozen=True)
class Space:
    """Prismatic room: CCW ``footprint`` polygon (n, 2) extruded from
    ``z_floor`` to ``z_ceiling`` along the up axis."""

    footprint: np.ndarray
    z_floor: float
    z_ceiling: float

    def __post_init__(self):
        fp = np.ascontiguousarray(np.asarray(self.footprint, dtype=float))
        if fp.ndim != 2 or fp.shape[1] != 2 or len(fp) < 3:
            raise ValueError(f"footprint must be (n>=3, 2), got {fp.shape}")
        if self.z_ceiling <= self.z_floor:
            raise ValueError("z_ceiling must be above z_floor")
        area = _poly2d.signed_area(fp)
        if area <= 0:
            raise ValueError("footprint must have positive area and CCW orientation")
        if not _poly2d.is_simple(fp):
            raise ValueError("footprint must be a simple polygon")
        object.__setattr__(self, "footprint", fp)

    @property
    def height(self) -> float:
        return self.z_ceiling - self.z_floor

    def area(self) -> float:
        return _poly2d.signed_area(self.footprint)


def _triangle_geometry(vertices, triangles):
    """Unit normals and areas for every triangle. Degenerate rows get a zero normal."""
    p = vertices[triangles]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    areas = 0.5 * norms
    safe = np.where(norms > 0, norms, 1.0)
    return cross / safe[:, None], areas


def _support_mask(vertices, triangles, tri_normals, pool, normal, offset,
                  dist_tol, cos_tol):
    """Boolean mask over ``pool``: triangles whose three vertices lie within
    dist_tol of the plane and whose normal agrees within the angle gate."""
    dist = np.abs(vertices @ normal - offset)
    ok_dist = np.all(dist[triangles[pool]] <= dist_tol, axis=1)
    ok_angle = tri_normals[pool] @ normal >= cos_tol
    return ok_dist & ok_angle


def _fit_plane(points, weights, orient):
    """Weighted least-squares plane through ``points``.

    Returns (unit normal, offset); the normal is flipped to agree with
    ``orient`` so refinement never reverses a plane's side.
    """
    w = weights / weights.sum()
    centroid = w @ points
    q = points - centroid
    cov = (q * w[:, None]).T @ q
    _, vecs = np.linalg.eigh(cov)
    n = vecs[:, 0]
    if float(n @ orient) < 0.0:
        n = -n
    n = n / np.linalg.norm(n)
    return n, float(n @ centroid)


def extract_planes(mesh: SurfaceMesh, *, dist_tol: float = 0.03,
                   angle_tol: float = 10.0, min_area: float = 0.5,
                   max_planes: int = 12, seed: int = 0) -> list[Plane]:
    """Extract the dominant planes of a scan, largest inlier area first.

    Repeatedly proposes candidate planes from randomly drawn scan
    triangles, keeps the best-supported candidate of each round, and
    refines it by area-weighted least squares until its inlier set is
    stable.  A triangle supports a plane when all three of its vertices
    lie within ``dist_tol`` (meters) and its normal is within
    ``angle_tol`` (degrees) of the plane normal.  Extraction stops when
    no candidate reaches ``min_area`` (square meters) of support or
    ``max_planes`` planes were found.

    Raises EmptyScan for a triangle-free scan and NoPlanesFound when
    nothing meets the area threshold.
    """
    if mesh.triangles.shape[0] == 0:
        raise EmptyScan("scan contains no triangles")
    if dist_tol <= 0 or min_area <= 0:
        raise ValueError("dist_tol and min_area must be positive")
    if not 0 < angle_tol < 90:
        raise ValueError("angle_tol must be in (0, 90) degrees")

    verts = mesh.vertices
    tris = mesh.triangles
    tri_n, tri_area = _triangle_geometry(verts, tris)
    cos_tol = math.cos(math.radians(angle_tol))
    rng = np.random.default_rng(seed)

    remaining = tri_area > 0  # degenerate triangles never seed or support a plane
    planes: list[Plane] = []

    while len(planes) < max_planes:
        pool = np.flatnonzero(remaining)
        if pool.size == 0:
            break

        best_area, best = 0.0, None
        for _ in range(_TRIALS_PER_ROUND):
            t = int(pool[rng.integers(pool.size)])
            n = tri_n[t]
            d = float(n @ verts[tris[t, 0]])
            sel = _support_mask(verts, tris, tri_n, pool, n, d, dist_tol, cos_tol)
            area = float(tri_area[pool[sel]].sum())
            if area > best_area:
                best_area, best = area, (n, d)
        if best is None or best_area < min_area:
            break

        n, d = best
        sel = _support_mask(verts, tris, tri_n, pool, n, d, dist_tol, cos_tol)
        for _ in range(_MAX_REFINE):
            idx = pool[sel]
            pts = verts[tris[idx]].reshape(-1, 3)
            wts = np.repeat(tri_area[idx], 3)
            n, d = _fit_plane(pts, wts, n)
            new_sel = _support_mask(verts, tris, tri_n, pool, n, d, dist_tol, cos_tol)
            if np.array_equal(new_sel, sel):
                break
            sel = new_sel

        idx = pool[sel]
        area = float(tri_area[idx].sum())
        if area < min_area:
            break
        planes.append(Plane(normal=n, offset=d, inlier_area=area,
                            inlier_count=int(idx.size), inliers=idx))

        # Retire by distance alone: stragglers of this surface that fail the
        # angle gate (noisy normals) must not seed a spurious later plane.
        dist = np.abs(verts @ n - d)
        retire = np.all(dist[tris[pool]] <= dist_tol, axis=1)
        remaining[pool[retire]] = False

    if not planes:
        raise NoPlanesFound("no plane reached the minimum inlier area "
                            f"({min_area} m^2)")
    planes.sort(key=lambda p: -p.inlier_area)
    logger.debug("extracted %d planes, areas %s", len(planes),
                 [round(p.inlier_area, 3) for p in planes])
    return planes


def _horizontal_basis(up):
    """Right-handed orthonormal (e1, e2) spanning the plane normal to ``up``."""
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(up @ ref)) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    e1 = ref - (ref @ up) * up
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(up, e1)
    return e1, e2


def classify_planes(planes: list[Plane], up=(0.0, 0.0, 1.0),
                    angle_tol: float = 10.0) -> ClassifiedPlanes:
    """Split extracted planes into floor, ceiling and walls.

    A plane is horizontal when its normal is within ``angle_tol`` degrees
    of the up axis (either sign) and vertical when the normal is within
    ``angle_tol`` of the horizontal plane.  Since normals point into the
    room, floor candidates face up and ceiling candidates face down; the
    floor is the lowest candidate, the ceiling the highest.  Walls are
    sorted by the azimuth of their inward normal around ``up``.  Planes
    that are neither horizontal nor vertical are discarded.
    """
    if not planes:
        raise ValueError("no planes to classify")
    up = np.asarray(up, dtype=float)
    nrm = np.linalg.norm(up)
    if nrm == 0:
        raise ValueError("up direction must be nonzero")
    up = up / nrm
    tol = math.radians(angle_tol)
    cos_tol, sin_tol = math.cos(tol), math.sin(tol)

    floors, ceilings, walls, discarded = [], [], [], []
    for p in planes:
        c = float(p.normal @ up)
        if abs(c) >= cos_tol:
            (floors if c > 0 else ceilings).append(p)
        elif abs(c) <= sin_tol:
            walls.append(p)
        else:
            discarded.append(p)

    if not floors:
        raise MissingFloor("no upward-facing horizontal plane")
    if not ceilings:
        raise MissingCeiling("no downward-facing horizontal plane")

    floor = min(floors, key=lambda p: p.height_along(up))
    ceiling = max(ceilings, key=lambda p: p.height_along(up))
    discarded += [p for p in floors if p is not floor]
    discarded += [p for p in ceilings if p is not ceiling]

    if ceiling.height_along(up) <= floor.height_along(up):
        raise MissingCeiling("ceiling plane is not above the floor plane")
    if len(walls) < 3:
        raise TooFewWalls(f"found {len(walls)} wall planes, need at least 3")

    e1, e2 = _horizontal_basis(up)
    walls.sort(key=lambda p: math.atan2(float(p.normal @ e2), float(p.normal @ e1)))
    return ClassifiedPlanes(floor=floor, ceiling=ceiling, walls=walls,
                            discarded=discarded, up=up)


def _rotation_to_z(up):
    """Rotation matrix taking ``up`` onto +z (Rodrigues)."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(up @ z)
    if c > 1.0 - 1e-12:
        return np.eye(3)
    if c < -1.0 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])
    v = np.cross(up, z)
    s = np.linalg.norm(v)
    v = v / s
    k = np.array([[0.0, -v[2], v[1]],
                  [v[2], 0.0, -v[0]],
                  [-v[1], v[0], 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def _clip_half_plane(poly, a, b):
    """Sutherland-Hodgman clip of ``poly`` against the half-plane a.p >= b."""
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        dp = a @ p - b
        dq = a @ q - b
        if dp >= 0.0:
            out.append(p)
        if (dp >= 0.0) != (dq >= 0.0):
            t = dp / (dp - dq)
            out.append(p + t * (q - p))
    return out


def build_space(classified: ClassifiedPlanes) -> Space:
    """Intersect the inward wall half-planes into a convex footprint.

    Walls are projected onto the horizontal plane at mid room height and
    a large seed square is clipped against each inward half-plane in
    turn.  Every edge of the result must lie on a wall line; an edge
    left over from the seed square means the walls do not enclose a
    bounded region.  Footprint vertices are recomputed as the exact
    intersection of their two adjacent wall lines, and the polygon is
    rotated so edge ``k`` lies on the ``k``-th wall in azimuth order.
    """
    cp = classified
    rot = _rotation_to_z(cp.up)
    z_floor = cp.floor.height_along(cp.up)
    z_ceiling = cp.ceiling.height_along(cp.up)
    z_mid = 0.5 * (z_floor + z_ceiling)

    lines = []  # (unit 2D inward normal a, offset b): interior is a.p >= b
    for w in cp.walls:
        n3 = rot @ w.normal
        a = n3[:2]
        s = float(np.linalg.norm(a))
        if s < 1e-12:
            continue  # cannot happen for near-vertical planes, kept for safety
        b = (w.offset - n3[2] * z_mid) / s
        lines.append((a / s, b))

    poly = [np.array(p, dtype=float) for p in
            [(-_CLIP_EXTENT, -_CLIP_EXTENT), (_CLIP_EXTENT, -_CLIP_EXTENT),
             (_CLIP_EXTENT, _CLIP_EXTENT), (-_CLIP_EXTENT, _CLIP_EXTENT)]]
    for a, b in lines:
        poly = _clip_half_plane(poly, a, b)
        if len(poly) < 3:
            raise EmptyFootprint("wall half-planes have an empty intersection")

    # drop duplicate consecutive vertices produced by cuts through vertices
    deduped = []
    for p in poly:
        if not deduped or np.linalg.norm(p - deduped[-1]) > 1e-9:
            deduped.append(p)
    if len(deduped) > 1 and np.linalg.norm(deduped[0] - deduped[-1]) <= 1e-9:
        deduped.pop()
    if len(deduped) < 3:
        raise EmptyFootprint("footprint degenerated to fewer than 3 vertices")
    poly = deduped

    # match each edge to the wall line it lies on
    edge_wall = []
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        residuals = [max(abs(a @ p - b), abs(a @ q - b)) for a, b in lines]
        k = int(np.argmin(residuals))
        if residuals[k] > _WALL_MATCH_TOL:
            raise UnboundedFootprint(
                "wall half-planes do not bound the footprint "
                f"(edge {i} lies on no wall line)")
        edge_wall.append(k)

    # merge consecutive edges that landed on the same wall
    keep = [i for i in range(len(poly))
            if edge_wall[i] != edge_wall[i - 1]]
    if len(keep) < 3:
        raise EmptyFootprint("footprint degenerated to fewer than 3 vertices")
    poly = [poly[i] for i in keep]
    edge_wall = [edge_wall[i] for i in keep]

    # rotate so the edge on the lowest-numbered wall comes first
    start = int(np.argmin(edge_wall))
    poly = poly[start:] + poly[:start]
    edge_wall = edge_wall[start:] + edge_wall[:start]

    # snap each vertex to the exact intersection of its adjacent wall lines
    snapped = []
    for i in range(len(poly)):
        ka, kb = edge_wall[i - 1], edge_wall[i]
        a1, b1 = lines[ka]
        a2, b2 = lines[kb]
        mat = np.array([a1, a2])
        det = float(np.linalg.det(mat))
        if abs(det) > 1e-12:
            snapped.append(np.linalg.solve(mat, np.array([b1, b2])))
        else:
            snapped.append(poly[i])

    footprint = np.array(snapped)
    logger.debug("footprint with %d vertices on walls %s", len(footprint), edge_wall)
    return Space(footprint=footprint, z_floor=z_floor, z_ceiling=z_ceiling)
