"""Synthetic room scans for testing and demos.

Each room surface is sampled as an independent triangle grid (vertices
are not shared between surfaces, like a real scan) with triangles wound
so their normals face the room interior.  Optional Gaussian noise
perturbs every vertex coordinate independently.
"""

import numpy as np

from .geometry import SurfaceMesh
from .meshgen import triangulate_footprint


def _face_grid(origin, eu, ev, len_u, len_v, spacing):
    """Rectangle grid patch; triangle normals follow eu x ev."""
    nu = max(1, round(len_u / spacing))
    nv = max(1, round(len_v / spacing))
    u = np.linspace(0.0, len_u, nu + 1)
    v = np.linspace(0.0, len_v, nv + 1)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    verts = (np.asarray(origin, dtype=float)
             + uu.ravel()[:, None] * np.asarray(eu, dtype=float)
             + vv.ravel()[:, None] * np.asarray(ev, dtype=float))

    tris = []
    for i in range(nu):
        for j in range(nv):
            v00 = i * (nv + 1) + j
            v10 = (i + 1) * (nv + 1) + j
            v01 = v00 + 1
            v11 = v10 + 1
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return verts, np.asarray(tris, dtype=np.int64)


def _assemble(patches, noise, seed):
    verts = []
    tris = []
    offset = 0
    for v, t in patches:
        verts.append(v)
        tris.append(t + offset)
        offset += len(v)
    verts = np.vstack(verts)
    tris = np.vstack(tris)
    if noise > 0:
        rng = np.random.default_rng(seed)
        verts = verts + rng.normal(0.0, noise, size=verts.shape)
    return SurfaceMesh(vertices=verts, triangles=tris)


def box_scan(width: float = 4.0, depth: float = 3.0, height: float = 2.5, *,
             spacing: float = 0.25, noise: float = 0.0, seed: int = 0) -> SurfaceMesh:
    """Axis-aligned box room [0,w] x [0,d] x [0,h] scanned from the inside."""
    w, d, h = float(width), float(depth), float(height)
    ex, ey, ez = np.eye(3)
    patches = [
        _face_grid((0, 0, 0), ex, ey, w, d, spacing),   # floor, normal +z
        _face_grid((0, 0, h), ey, ex, d, w, spacing),   # ceiling, normal -z
        _face_grid((0, 0, 0), ey, ez, d, h, spacing),   # wall x=0, normal +x
        _face_grid((w, 0, 0), ez, ey, h, d, spacing),   # wall x=w, normal -x
        _face_grid((0, 0, 0), ez, ex, h, w, spacing),   # wall y=0, normal +y
        _face_grid((0, d, 0), ex, ez, w, h, spacing),   # wall y=d, normal -y
    ]
    return _assemble(patches, noise, seed)


def _refine_to_spacing(points2d, tris, spacing, max_rounds=8):
    """Split every triangle 4-ways until no edge exceeds the spacing."""
    pts = [tuple(p) for p in points2d]
    tris = [tuple(t) for t in tris]
    for _ in range(max_rounds):
        arr = np.asarray(pts)
        longest = 0.0
        for a, b, c in tris:
            for i, j in ((a, b), (b, c), (c, a)):
                longest = max(longest, float(np.linalg.norm(arr[i] - arr[j])))
        if longest <= spacing:
            break
        midpoint_of = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoint_of:
                pts.append(tuple(0.5 * (arr[i] + arr[j])))
                midpoint_of[key] = len(pts) - 1
            return midpoint_of[key]

        next_tris = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        tris = next_tris
    return np.asarray(pts, dtype=float), np.asarray(tris, dtype=np.int64)


def polygon_scan(footprint, height: float, *, spacing: float = 0.25,
                 noise: float = 0.0, seed: int = 0) -> SurfaceMesh:
    """Prismatic room over a CCW footprint polygon, scanned from the inside."""
    fp = np.asarray(footprint, dtype=float)
    h = float(height)
    base = triangulate_footprint(fp)
    pts2d, tris2d = _refine_to_spacing(fp, base, spacing)

    floor = (np.column_stack([pts2d, np.zeros(len(pts2d))]), tris2d)
    ceil_tris = tris2d[:, ::-1]  # flip so normals face down into the room
    ceiling = (np.column_stack([pts2d, np.full(len(pts2d), h)]), ceil_tris)

    patches = [floor, ceiling]
    ez = np.array([0.0, 0.0, 1.0])
    n = len(fp)
    for k in range(n):
        p, q = fp[k], fp[(k + 1) % n]
        length = float(np.linalg.norm(q - p))
        direction = np.concatenate([(q - p) / length, [0.0]])
        origin = np.concatenate([p, [0.0]])
        # eu=+z, ev=edge direction gives normals pointing left of the
        # edge, i.e. into a CCW room
        patches.append(_face_grid(origin, ez, direction, h, length, spacing))
    return _assemble(patches, noise, seed)


def regular_polygon(sides: int, radius: float = 2.0) -> np.ndarray:
    """CCW regular polygon footprint centered at the origin."""
    if sides < 3:
        raise ValueError("a polygon needs at least 3 sides")
    ang = 2.0 * np.pi * np.arange(sides) / sides
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
