"""Sparse assembly and direct solution of the scheme systems."""

import logging
import numpy as np

from dataclasses import dataclass
from multiprocessing.pool import ThreadPool
from scipy.sparse import coo_matrix, diags
from scipy.sparse.linalg import splu


log = logging.getLogger(__name__)


class SingularSystemError(RuntimeError):
    """The linear system could not be solved to the residual contract."""

    def __init__(self, message, row=None):
        if row is not None:
            message = '%s (row %d)' % (message, row)
        super().__init__(message)
        self.row = row


@dataclass
class SparseSystem:
    matrix: object  # scipy.sparse.csr_matrix, sorted indices
    rhs: np.ndarray
    constrained: np.ndarray  # indices of identity rows
    dofmap: object = None

    @property
    def n(self):
        return self.matrix.shape[0]


class SparseBuilder(object):
    """Coordinate-format accumulator; duplicate entries are summed."""

    def __init__(self, n):
        self.n = int(n)
        self._rows, self._cols, self._vals = [], [], []

    def _check(self, idx):
        idx = np.asarray(idx)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError('Index out of range [0, %d): %s' % (
                self.n, idx[(idx < 0) | (idx >= self.n)][:5]))
        return idx

    def accumulate(self, row, col, value):
        self._check(row)
        self._check(col)
        self._rows.append(np.atleast_1d(row))
        self._cols.append(np.atleast_1d(col))
        self._vals.append(np.atleast_1d(np.asarray(value, dtype=float)))

    def add_block(self, rows, cols, blocks):
        """Scatter dense local blocks.

        Args:
            rows (ndarray): (nb, p) global row indices.
            cols (ndarray): (nb, q) global column indices.
            blocks (ndarray): (nb, p, q) values, blocks[b, i, j] goes to
                (rows[b, i], cols[b, j]).
        """
        rows, cols = self._check(rows), self._check(cols)
        blocks = np.asarray(blocks, dtype=float)
        r = np.broadcast_to(rows[:, :, None], blocks.shape)
        c = np.broadcast_to(cols[:, None, :], blocks.shape)
        self._rows.append(r.ravel())
        self._cols.append(c.ravel())
        self._vals.append(blocks.ravel())

    def extend(self, other):
        """Append the contributions of another builder of the same size."""
        assert other.n == self.n
        self._rows += other._rows
        self._cols += other._cols
        self._vals += other._vals

    def tocsr(self):
        if self._rows:
            rows = np.concatenate(self._rows)
            cols = np.concatenate(self._cols)
            vals = np.concatenate(self._vals)
        else:
            rows = cols = np.zeros(0, dtype=int)
            vals = np.zeros(0)
        matrix = coo_matrix((vals, (rows, cols)), shape=(self.n, self.n)).tocsr()
        matrix.sum_duplicates()
        matrix.sort_indices()
        return matrix


def accumulate(builder, row, col, value):
    builder.accumulate(row, col, value)


def map_cell_batches(func, ncells, threads=1):
    """Apply func to consecutive cell index batches, one batch per thread.

    Results are returned in batch order, so reductions over them do not
    depend on scheduling.
    """
    threads = max(1, min(int(threads), ncells or 1))
    bounds = np.linspace(0, ncells, threads + 1).astype(int)
    batches = [np.arange(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    if threads == 1:
        return [func(batches[0])]
    pool = ThreadPool(threads)
    try:
        return pool.map(func, batches)
    finally:
        pool.close()


def apply_dirichlet(matrix, rhs, constrained, dofmap=None):
    """Replace the constrained rows by identity rows with zero right-hand side."""
    constrained = np.asarray(constrained, dtype=int)
    mask = np.zeros(matrix.shape[0])
    mask[constrained] = 1.0
    matrix = (diags(1.0 - mask) @ matrix + diags(mask)).tocsr()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    rhs = np.array(rhs, dtype=float)
    rhs[constrained] = 0.0
    return SparseSystem(matrix, rhs, constrained, dofmap)


def relative_residual(matrix, x, b):
    """||Ax - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)."""
    r = np.abs(matrix @ x - b).max(initial=0.0)
    norm = np.asarray(abs(matrix).sum(axis=1)).max(initial=0.0)
    scale = (norm * np.abs(x).max(initial=0.0)
             + np.abs(b).max(initial=0.0))
    return float(r / scale) if scale > 0 else float(r)


def direct_solve(system, tol=1e-12):
    """Solve with a sparse LU factorization (SuperLU, COLAMD ordering).

    Raises:
        SingularSystemError: empty row, exactly singular factor, non-finite
            solution or relative residual above `tol`.
    """
    matrix = system.matrix.tocsr()
    matrix.eliminate_zeros()
    empty = np.flatnonzero(np.diff(matrix.indptr) == 0)
    if len(empty):
        raise SingularSystemError('Matrix has an empty row', row=int(empty[0]))

    try:
        lu = splu(matrix.tocsc())
    except RuntimeError as e:
        raise SingularSystemError('LU factorization failed: %s' % e)

    x = lu.solve(np.asarray(system.rhs, dtype=float))
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise SingularSystemError('Non-finite solution', row=bad)

    res = relative_residual(matrix, x, system.rhs)
    log.debug('solved n=%d nnz=%d, relative residual %.3e', system.n, matrix.nnz, res)
    if res > tol:
        row = int(np.abs(matrix @ x - system.rhs).argmax())
        raise SingularSystemError('Relative residual %.3e exceeds %.1e' % (res, tol), row=row)
    return x


def format_coo(matrix):
    """Coordinate text dump, one ``row col value`` line per stored entry."""
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return ''.join('%d %d %.17g\n' % (coo.row[k], coo.col[k], coo.data[k]) for k in order)
