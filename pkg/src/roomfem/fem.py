"""P1 tetrahedral finite elements for the Poisson equation.

Assembles the stiffness matrix for piecewise-linear elements, places
point sources by evaluating the hat functions of the containing tet,
eliminates Dirichlet rows and columns symmetrically, and solves with
Jacobi-preconditioned conjugate gradients.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateTet,
    NoDirichletData,
    PointOutsideDomain,
    SolverDiverged,
    UnknownBoundaryTag,
)
from .meshgen import TetMesh
from .solver import CsrMatrix, jacobi_preconditioner, matvec, pcg_solve

logger = logging.getLogger(__name__)

_VOLUME_EPS = 1e-14
_BARY_EPS = 1e-10


@dataclass(frozen=True)
class PointSource:
    """Dirac load of the given strength at ``position``."""

    position: tuple[float, float, float]
    strength: float


@dataclass(frozen=True)
class PoissonProblem:
    """Point sources plus Dirichlet values keyed by boundary tag."""

    sources: tuple[PointSource, ...]
    dirichlet: dict[str, float]


@dataclass(frozen=True)
class SolutionField:
    """Nodal solution values with their range."""

    values: np.ndarray
    min: float
    max: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "SolutionField":
        values = np.ascontiguousarray(np.asarray(values, dtype=float))
        if not np.all(np.isfinite(values)):
            raise ValueError("solution values must be finite")
        return cls(values=values, min=float(values.min()), max=float(values.max()))


def _barycentric_matrices(coords: np.ndarray):
    """Volumes and hat-function coefficient matrices for (m, 4, 3) tet coords.

    Row i of the returned (m, 4, 4) array holds the affine coefficients
    (c, gx, gy, gz) of hat function i, i.e. lambda_i(x) = c + g . x.
    """
    m = coords.shape[0]
    b = np.empty((m, 4, 4))
    b[:, :, 0] = 1.0
    b[:, :, 1:] = coords
    det = np.linalg.det(b)
    vols = det / 6.0
    if np.any(np.abs(vols) <= _VOLUME_EPS):
        idx = int(np.flatnonzero(np.abs(vols) <= _VOLUME_EPS)[0])
        raise DegenerateTet(f"tet {idx} has volume {vols[idx]!r}")
    w = np.linalg.inv(b).transpose(0, 2, 1)
    return vols, w


def local_stiffness(tet_coords: np.ndarray) -> np.ndarray:
    """4x4 element stiffness for one tetrahedron given as (4, 3) coordinates.

    Entry (i, j) is volume * grad(lambda_i) . grad(lambda_j); the matrix
    is symmetric with zero row sums.  Raises DegenerateTet when the
    volume magnitude is at or below 1e-14.
    """
    coords = np.asarray(tet_coords, dtype=float).reshape(1, 4, 3)
    vols, w = _barycentric_matrices(coords)
    grads = w[0, :, 1:]
    return abs(vols[0]) * (grads @ grads.T)


def assemble_stiffness(mesh: TetMesh) -> CsrMatrix:
    """Global stiffness matrix in CSR form (symmetric, zero row sums)."""
    coords = mesh.vertices[mesh.tets]
    vols, w = _barycentric_matrices(coords)
    grads = w[:, :, 1:]
    local = np.einsum("t,tik,tjk->tij", np.abs(vols), grads, grads)
    # force bit-exact symmetry so the conjugate gradient solver sees a
    # genuinely symmetric operator
    local = 0.5 * (local + local.transpose(0, 2, 1))
    m = len(mesh.tets)
    rows = np.broadcast_to(mesh.tets[:, :, None], (m, 4, 4)).ravel()
    cols = np.broadcast_to(mesh.tets[:, None, :], (m, 4, 4)).ravel()
    return CsrMatrix.from_triplets(mesh.num_vertices, rows, cols, local.ravel())


def lumped_mass(mesh: TetMesh) -> np.ndarray:
    """Row-sum lumped mass vector: each tet spreads volume/4 to its corners."""
    vols = np.abs(np.linalg.det(
        mesh.vertices[mesh.tets][:, 1:] - mesh.vertices[mesh.tets][:, :1])) / 6.0
    out = np.zeros(mesh.num_vertices)
    np.add.at(out, mesh.tets.ravel(), np.repeat(vols / 4.0, 4))
    return out


def locate_point(mesh: TetMesh, point) -> tuple[int, np.ndarray]:
    """Find the tet containing ``point`` and its barycentric coordinates.

    Containment allows a 1e-10 tolerance outside [0, 1]; points on shared
    faces resolve to the lowest tet index.  Raises PointOutsideDomain.
    """
    p = np.asarray(point, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"point must have shape (3,), got {p.shape}")
    coords = mesh.vertices[mesh.tets]
    _, w = _barycentric_matrices(coords)
    affine = np.concatenate([[1.0], p])
    lam = np.einsum("tij,j->ti", w, affine)
    inside = np.all(lam >= -_BARY_EPS, axis=1) & np.all(lam <= 1.0 + _BARY_EPS, axis=1)
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        raise PointOutsideDomain(f"point {p.tolist()} lies in no tetrahedron")
    tet = int(hits[0])
    return tet, lam[tet]


def assemble_point_sources(mesh: TetMesh, sources) -> np.ndarray:
    """Load vector for Dirac sources: strength times the hat functions of
    the containing tet.  The entries of the result sum to the total
    injected strength."""
    b = np.zeros(mesh.num_vertices)
    for i, src in enumerate(sources):
        try:
            tet, lam = locate_point(mesh, src.position)
        except PointOutsideDomain as exc:
            raise PointOutsideDomain(f"source {i}: {exc}") from None
        b[mesh.tets[tet]] += src.strength * lam
    return b


def constrain_nodes(a: CsrMatrix, b: np.ndarray, nodes, values):
    """Symmetric elimination of prescribed nodal values.

    Moves known columns to the right-hand side, zeroes the constrained
    rows and columns, sets unit diagonals and writes the prescribed
    values into ``b``.  Returns ``(a, b, nodes)`` with the constrained
    node indices sorted.
    """
    nodes = np.asarray(nodes, dtype=np.int64).ravel()
    vals = np.asarray(values, dtype=float).ravel()
    if nodes.shape != vals.shape:
        raise ValueError("nodes and values must align")
    order = np.argsort(nodes, kind="stable")
    nodes, vals = nodes[order], vals[order]

    mask = np.zeros(a.n, dtype=bool)
    mask[nodes] = True
    g = np.zeros(a.n)
    g[nodes] = vals

    rows = a.row_indices()
    col_fixed = mask[a.col_indices]
    moved = np.where(col_fixed, a.values * g[a.col_indices], 0.0)
    row_sums = np.bincount(rows, weights=moved, minlength=a.n)

    new_b = np.asarray(b, dtype=float).copy()
    free = ~mask
    new_b[free] -= row_sums[free]
    new_b[mask] = g[mask]

    new_vals = np.where(mask[rows] | col_fixed, 0.0, a.values)
    diag_pos = a.diagonal_positions()
    missing = np.flatnonzero((diag_pos < 0) & mask)
    if missing.size:
        raise ValueError(f"row {int(missing[0])} has no stored diagonal entry")
    new_vals[diag_pos[nodes]] = 1.0

    new_a = CsrMatrix(a.n, a.row_offsets, a.col_indices, new_vals)
    return new_a, new_b, nodes


def dirichlet_nodes(mesh: TetMesh, dirichlet: dict[str, float]):
    """Resolve tag-keyed boundary values to (node indices, values).

    Tags are applied in sorted order, so a node shared by several tagged
    patches (a room edge or corner) takes the value of the last tag
    alphabetically.
    """
    present = set(mesh.facet_tags)
    unknown = sorted(set(dirichlet) - present)
    if unknown:
        raise UnknownBoundaryTag(f"mesh has no boundary tag {unknown[0]!r}")
    value_of: dict[int, float] = {}
    for tag in sorted(dirichlet):
        for node in mesh.tagged_vertices(tag):
            value_of[int(node)] = float(dirichlet[tag])
    nodes = np.fromiter(sorted(value_of), dtype=np.int64, count=len(value_of))
    vals = np.array([value_of[n] for n in nodes])
    return nodes, vals


def apply_dirichlet(a: CsrMatrix, b: np.ndarray, mesh: TetMesh,
                    dirichlet: dict[str, float]):
    """Eliminate tag-keyed Dirichlet data from the assembled system."""
    if not dirichlet:
        raise NoDirichletData("at least one boundary tag must carry a value")
    nodes, vals = dirichlet_nodes(mesh, dirichlet)
    if nodes.size == 0:
        raise NoDirichletData("no mesh vertices carry the given tags")
    return constrain_nodes(a, b, nodes, vals)


def solve_poisson(mesh: TetMesh, problem: PoissonProblem, *, tol: float = 1e-8,
                  max_iter: int | None = None) -> SolutionField:
    """Assemble and solve the Poisson problem on the mesh.

    The iteration starts from the prescribed boundary values, so
    constrained nodes hold their Dirichlet data exactly in the returned
    field.  Raises SolverDiverged when the conjugate gradient solver
    fails to converge.
    """
    a = assemble_stiffness(mesh)
    b = assemble_point_sources(mesh, problem.sources)
    a, b, fixed = apply_dirichlet(a, b, mesh, problem.dirichlet)

    x0 = np.zeros(a.n)
    x0[fixed] = b[fixed]
    precond = jacobi_preconditioner(a)
    x, stats = pcg_solve(a, b, precond, tol=tol, max_iter=max_iter, x0=x0)
    if not stats.converged:
        raise SolverDiverged(
            f"conjugate gradients stopped after {stats.iterations} iterations "
            f"with relative residual {stats.final_relative_residual:.3e}")
    logger.info("solved %d unknowns in %d iterations (residual %.2e)",
                a.n - fixed.size, stats.iterations, stats.final_relative_residual)
    return SolutionField.from_values(x)


def residual_norm(a: CsrMatrix, x: np.ndarray, b: np.ndarray) -> float:
    """Euclidean norm of b - A x; a convenience for diagnostics."""
    r = b - matvec(a, x)
    return float(np.sqrt(np.sum(r * r)))
