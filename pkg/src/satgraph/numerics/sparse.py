"""Constant sparse matrices in coordinate form.

Sparse operands (adjacency matrices and their normalizations) are data, not
parameters, so they never receive gradients. Products are delegated to
``scipy.sparse`` CSR kernels.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import DataError


class SparseMatrix:
    """An ``rows x cols`` matrix with unique, row-major sorted coordinates."""

    __slots__ = ("rows", "cols", "row", "col", "val", "_csr", "_csr_t")

    def __init__(self, rows: int, cols: int, row, col, val, *, check: bool = True):
        row = np.asarray(row, dtype=np.int64).reshape(-1)
        col = np.asarray(col, dtype=np.int64).reshape(-1)
        val = np.asarray(val, dtype=np.float64).reshape(-1)
        if not (len(row) == len(col) == len(val)):
            raise DataError("row, col and val must have equal length")
        if check and len(row):
            if row.min() < 0 or row.max() >= rows or col.min() < 0 or col.max() >= cols:
                raise DataError(f"sparse coordinate out of range for shape ({rows}, {cols})")
        order = np.lexsort((col, row))
        row, col, val = row[order], col[order], val[order]
        if check and len(row) > 1:
            dup = (row[1:] == row[:-1]) & (col[1:] == col[:-1])
            if dup.any():
                i = int(np.flatnonzero(dup)[0])
                raise DataError(f"duplicate sparse coordinate ({row[i]}, {col[i]})")
        self.rows, self.cols = int(rows), int(cols)
        self.row, self.col, self.val = row, col, val
        self._csr = None
        self._csr_t = None

    @classmethod
    def from_entries(cls, rows, cols, entries):
        """Build from an iterable of ``(row, col, value)`` triplets."""
        entries = list(entries)
        if not entries:
            return cls(rows, cols, [], [], [])
        r, c, v = zip(*entries)
        return cls(rows, cols, r, c, v)

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64)
        r, c = np.nonzero(dense)
        return cls(dense.shape[0], dense.shape[1], r, c, dense[r, c])

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls(n, n, idx, idx, np.ones(n))

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self):
        return len(self.val)

    def entries(self):
        return list(zip(self.row.tolist(), self.col.tolist(), self.val.tolist()))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols))
        out[self.row, self.col] = self.val
        return out

    def to_scipy(self) -> sp.csr_matrix:
        if self._csr is None:
            self._csr = sp.csr_matrix((self.val, (self.row, self.col)), shape=self.shape)
        return self._csr

    def to_scipy_t(self) -> sp.csr_matrix:
        if self._csr_t is None:
            self._csr_t = self.to_scipy().T.tocsr()
        return self._csr_t

    def row_counts(self) -> np.ndarray:
        return np.bincount(self.row, minlength=self.rows)

    def pattern(self) -> "SparseMatrix":
        """Same coordinates with all values set to one."""
        return SparseMatrix(self.rows, self.cols, self.row, self.col, np.ones(self.nnz), check=False)

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, self.col, self.row, self.val, check=False)

    def select_rows(self, rows) -> "SparseMatrix":
        """Sub-matrix of the given rows, in the given order."""
        rows = np.asarray(rows, dtype=np.int64)
        sub = self.to_scipy()[rows].tocoo()
        return SparseMatrix(len(rows), self.cols, sub.row, sub.col, sub.data, check=False)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self.row, other.row)
                and np.array_equal(self.col, other.col) and np.array_equal(self.val, other.val))

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"
