"""Sparse CSR storage and a Jacobi-preconditioned conjugate gradient solver.

Reductions use fixed-order numpy primitives (bincount, pairwise sum) so
repeated solves on the same inputs give bit-identical iterates.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NaNDetected, NonpositiveDiagonal

logger = logging.getLogger(__name__)


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    # fixed-order reduction; avoids threaded BLAS so results are reproducible
    return float(np.sum(a * b))


@dataclass
class CsrMatrix:
    """Square sparse matrix in compressed sparse row form.

    ``row_offsets`` has length n+1; ``col_indices`` are strictly
    increasing within each row; ``values`` aligns with ``col_indices``.
    """

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    _rows: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.row_offsets = np.ascontiguousarray(self.row_offsets, dtype=np.int64)
        self.col_indices = np.ascontiguousarray(self.col_indices, dtype=np.int64)
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.row_offsets.shape != (self.n + 1,):
            raise ValueError("row_offsets must have length n+1")
        if self.row_offsets[0] != 0 or self.row_offsets[-1] != len(self.col_indices):
            raise ValueError("row_offsets must start at 0 and end at nnz")
        if np.any(np.diff(self.row_offsets) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        if len(self.values) != len(self.col_indices):
            raise ValueError("values and col_indices must align")

    @classmethod
    def from_triplets(cls, n: int, rows, cols, values) -> "CsrMatrix":
        """Build from COO triplets, summing duplicate entries."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(values, dtype=float).ravel()
        if not (len(rows) == len(cols) == len(vals)):
            raise ValueError("triplet arrays must have equal length")
        if len(rows) and (rows.min() < 0 or rows.max() >= n or
                          cols.min() < 0 or cols.max() >= n):
            raise ValueError("triplet indices out of range")
        if len(rows) == 0:
            return cls(n, np.zeros(n + 1, dtype=np.int64),
                       np.empty(0, dtype=np.int64), np.empty(0))
        order = np.lexsort((cols, rows))
        r, c, v = rows[order], cols[order], vals[order]
        first = np.empty(len(r), dtype=bool)
        first[0] = True
        first[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        starts = np.flatnonzero(first)
        summed = np.add.reduceat(v, starts)
        ur, uc = r[starts], c[starts]
        counts = np.bincount(ur, minlength=n)
        offsets = np.concatenate([[0], np.cumsum(counts)])
        return cls(n, offsets, uc, summed)

    @property
    def nnz(self) -> int:
        return len(self.values)

    def row_indices(self) -> np.ndarray:
        """Row index of every stored entry (cached)."""
        if self._rows is None:
            self._rows = np.repeat(np.arange(self.n, dtype=np.int64),
                                   np.diff(self.row_offsets))
        return self._rows

    def diagonal(self) -> np.ndarray:
        """Diagonal entries; structurally missing ones come back as 0."""
        diag = np.zeros(self.n)
        rows = self.row_indices()
        on_diag = rows == self.col_indices
        diag[rows[on_diag]] = self.values[on_diag]
        return diag

    def diagonal_positions(self) -> np.ndarray:
        """Position of each row's diagonal entry in ``values``; -1 if absent."""
        pos = np.full(self.n, -1, dtype=np.int64)
        rows = self.row_indices()
        on_diag = rows == self.col_indices
        pos[rows[on_diag]] = np.flatnonzero(on_diag)
        return pos

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        dense[self.row_indices(), self.col_indices] = self.values
        return dense


def matvec(a: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Matrix-vector product with a deterministic accumulation order."""
    x = np.asarray(x, dtype=float)
    if x.shape != (a.n,):
        raise DimensionMismatch(f"expected vector of length {a.n}, got shape {x.shape}")
    products = a.values * x[a.col_indices]
    return np.bincount(a.row_indices(), weights=products, minlength=a.n)


@dataclass(frozen=True)
class JacobiPreconditioner:
    inv_diag: np.ndarray

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.inv_diag * r


def jacobi_preconditioner(a: CsrMatrix) -> JacobiPreconditioner:
    """Diagonal preconditioner; every diagonal entry must be positive."""
    diag = a.diagonal()
    bad = np.flatnonzero(diag <= 0)
    if bad.size:
        raise NonpositiveDiagonal(
            f"row {int(bad[0])} has diagonal {diag[bad[0]]!r}")
    return JacobiPreconditioner(inv_diag=1.0 / diag)


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    final_relative_residual: float
    converged: bool


def pcg_solve(a: CsrMatrix, b: np.ndarray, precond=None, *, tol: float = 1e-8,
              max_iter: int | None = None, x0: np.ndarray | None = None,
              callback=None):
    """Preconditioned conjugate gradients for symmetric positive definite A.

    Returns ``(x, SolveStats)``.  Convergence means the true relative
    residual ``|b - A x| / |b|`` is at or below ``tol``; hitting the
    iteration cap returns the best iterate seen with ``converged=False``
    rather than raising.  A zero right-hand side returns zero
    immediately.  Breakdown (non-finite numbers, loss of positive
    definiteness) raises NaNDetected.
    """
    b = np.asarray(b, dtype=float)
    if b.shape != (a.n,):
        raise DimensionMismatch(f"expected vector of length {a.n}, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise NaNDetected("right-hand side contains non-finite values")
    if x0 is not None and not np.all(np.isfinite(x0)):
        raise NaNDetected("starting guess contains non-finite values")
    if max_iter is None:
        max_iter = max(1000, 10 * a.n)
    if precond is None:
        precond = lambda r: r

    b_norm = np.sqrt(_dot(b, b))
    if b_norm == 0.0:
        return np.zeros(a.n), SolveStats(0, 0.0, True)

    x = np.zeros(a.n) if x0 is None else np.array(x0, dtype=float)
    r = b - matvec(a, x)
    z = precond(r)
    p = z.copy()
    rz = _dot(r, z)

    res = np.sqrt(_dot(r, r)) / b_norm
    best_x, best_res = x.copy(), res
    iterations = 0

    while res > tol and iterations < max_iter:
        ap = matvec(a, p)
        pap = _dot(p, ap)
        if not np.isfinite(pap) or pap <= 0.0:
            raise NaNDetected(f"breakdown at iteration {iterations}: p.Ap = {pap!r}")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        iterations += 1
        z = precond(r)
        rz_new = _dot(r, z)
        if not np.isfinite(rz_new):
            raise NaNDetected(f"breakdown at iteration {iterations}: r.z = {rz_new!r}")
        p = z + (rz_new / rz) * p
        rz = rz_new
        res = np.sqrt(_dot(r, r)) / b_norm
        if res < best_res:
            best_res = res
            best_x = x.copy()
        if callback is not None:
            callback(x)
        if res <= tol:
            # recurrence residual can drift; confirm against the true residual
            r = b - matvec(a, x)
            res = np.sqrt(_dot(r, r)) / b_norm
            if res < best_res:
                best_res = res
                best_x = x.copy()
            if res > tol:
                z = precond(r)
                p = z.copy()
                rz = _dot(r, z)

    if res <= tol:
        return x, SolveStats(iterations, res, True)
    logger.warning("pcg stopped at %d iterations, residual %.3e", iterations, best_res)
    return best_x, SolveStats(iterations, best_res, False)
