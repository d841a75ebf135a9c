"""Shared fixtures and independent oracles for the test suite.

The oracles here recompute quantities by routes that do not share code
with the package internals (brute-force loops, dense algebra, direct
enumeration), so agreement is meaningful.
"""

import numpy as np

from roomfem.meshgen import TetMesh, extrude_triangulation


def grid_base(k: int):
    """(k+1)^2 unit-square grid points and 2k^2 CCW triangles."""
    xs = np.linspace(0.0, 1.0, k + 1)
    pts = np.array([[x, y] for y in xs for x in xs])
    tris = []
    for j in range(k):
        for i in range(k):
            v00 = j * (k + 1) + i
            v10 = v00 + 1
            v01 = v00 + k + 1
            v11 = v01 + 1
            tris += [(v00, v10, v11), (v00, v11, v01)]
    return pts, np.asarray(tris, dtype=np.int64)


def unit_cube_mesh(k: int) -> TetMesh:
    """Structured unit-cube mesh with k layers each way (interior nodes exist)."""
    pts, tris = grid_base(k)
    return extrude_triangulation(pts, tris, 0.0, 1.0, k)


def boundary_nodes(mesh: TetMesh) -> np.ndarray:
    return np.unique(mesh.facets)


def face_incidence(mesh: TetMesh) -> dict:
    """How many tets share each face; brute-force enumeration."""
    counts: dict[tuple, int] = {}
    for tet in mesh.tets:
        for comb in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
            key = tuple(sorted(int(tet[c]) for c in comb))
            counts[key] = counts.get(key, 0) + 1
    return counts


def assert_conforming(mesh: TetMesh):
    """Interior faces belong to exactly 2 tets, boundary faces to 1, and
    the tagged facets are exactly the boundary faces."""
    counts = face_incidence(mesh)
    assert all(c in (1, 2) for c in counts.values()), "face shared by >2 tets"
    boundary = {key for key, c in counts.items() if c == 1}
    tagged = [tuple(sorted(int(i) for i in f)) for f in mesh.facets]
    assert len(tagged) == len(set(tagged)), "duplicate boundary facet"
    assert set(tagged) == boundary, "facet list disagrees with tet faces"


def shoelace(points: np.ndarray) -> float:
    """Polygon area, written independently of the package helper."""
    total = 0.0
    n = len(points)
    for i in range(n):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return 0.5 * total


def convex_footprint(seed: int, sides: int | None = None) -> np.ndarray:
    """Random convex CCW polygon: jittered angles on a random ellipse."""
    rng = np.random.default_rng(seed)
    k = int(sides if sides is not None else rng.integers(3, 9))
    jitter = rng.uniform(-0.3, 0.3, size=k)
    ang = 2.0 * np.pi * (np.arange(k) + jitter) / k
    a = rng.uniform(1.0, 4.0)
    b = rng.uniform(1.0, 4.0)
    cx, cy = rng.uniform(-5.0, 5.0, size=2)
    return np.column_stack([cx + a * np.cos(ang), cy + b * np.sin(ang)])


def halfplane_intersection_oracle(lines) -> np.ndarray:
    """Vertices of the region {p : a.p >= b for all (a, b)} by direct
    pairwise line intersection; assumes the region is bounded and the
    lines are in generic position."""
    pts = []
    k = len(lines)
    for i in range(k):
        for j in range(i + 1, k):
            a1, b1 = lines[i]
            a2, b2 = lines[j]
            mat = np.array([a1, a2], dtype=float)
            if abs(np.linalg.det(mat)) < 1e-12:
                continue
            p = np.linalg.solve(mat, np.array([b1, b2], dtype=float))
            if all(np.dot(a, p) >= b - 1e-9 for a, b in lines):
                pts.append(p)
    pts = np.array(pts)
    center = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0]))
    pts = pts[order]
    keep = [0]
    for i in range(1, len(pts)):
        if np.linalg.norm(pts[i] - pts[keep[-1]]) > 1e-9:
            keep.append(i)
    return pts[keep]
