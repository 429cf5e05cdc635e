"""CPM-dispersion of base matrices into quasi-cyclic binary arrays.

A :class:`QcBinaryMatrix` keeps only the ``k x r`` grid of shifts (``ZERO``
marks an all-zero block); expanded bits are produced on demand.  The block
with shift ``s`` is the ``t x t`` permutation whose row ``u`` has its single
1 at column ``(u + s) mod t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .base import MASKED, BaseMatrix, Origin
from .binary import as_csr, pack_rows
from .errors import (
    DimensionMismatchError,
    NotBlockStructuredError,
    SectionWeightExceededError,
    ShiftOutOfRangeError,
)

ZERO = -1


@dataclass(frozen=True, eq=False)
class QcBinaryMatrix:
    shifts: np.ndarray
    block_order: int

    def __post_init__(self) -> None:
        s = np.array(self.shifts, dtype=np.int64, copy=True)
        if s.ndim != 2:
            raise DimensionMismatchError("shift grid must be 2-D")
        t = int(self.block_order)
        live = s[s != ZERO]
        if t < 1 or (live.size and (live.min() < 0 or live.max() >= t)):
            raise ShiftOutOfRangeError(f"shifts must lie in [0, {t})")
        s.setflags(write=False)
        object.__setattr__(self, "shifts", s)
        object.__setattr__(self, "block_order", t)

    @property
    def block_rows(self) -> int:
        return self.shifts.shape[0]

    @property
    def block_cols(self) -> int:
        return self.shifts.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.block_rows * self.block_order, self.block_cols * self.block_order

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.shifts != ZERO)) * self.block_order

    @property
    def has_zero_blocks(self) -> bool:
        return bool((self.shifts == ZERO).any())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QcBinaryMatrix):
            return NotImplemented
        return self.block_order == other.block_order and np.array_equal(self.shifts, other.shifts)

    def __hash__(self) -> int:
        return hash((self.block_order, self.shifts.shape, self.shifts.tobytes()))

    def __repr__(self) -> str:
        m, n = self.shape
        return f"QcBinaryMatrix({self.block_rows}x{self.block_cols} blocks of order {self.block_order}, {m}x{n})"

    def column_weights(self) -> np.ndarray:
        per_block_col = np.count_nonzero(self.shifts != ZERO, axis=0)
        return np.repeat(per_block_col, self.block_order)

    def row_weights(self) -> np.ndarray:
        per_block_row = np.count_nonzero(self.shifts != ZERO, axis=1)
        return np.repeat(per_block_row, self.block_order)

    def coo(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column indices of every 1, ordered by (row, column)."""
        t = self.block_order
        bi, bj = np.nonzero(self.shifts != ZERO)
        s = self.shifts[bi, bj]
        u = np.arange(t)
        rows = (bi[:, None] * t + u[None, :]).ravel()
        cols = (bj[:, None] * t + (u[None, :] + s[:, None]) % t).ravel()
        order = np.lexsort((cols, rows))
        return rows[order], cols[order]

    def to_csr(self) -> sp.csr_matrix:
        rows, cols = self.coo()
        M = sp.csr_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols)), shape=self.shape)
        M.sort_indices()
        return M

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        rows, cols = self.coo()
        out[rows, cols] = 1
        return out

    def packed_rows(self) -> np.ndarray:
        return pack_rows(self)

    def block(self, i: int, j: int) -> np.ndarray:
        s = int(self.shifts[i, j])
        if s == ZERO:
            return np.zeros((self.block_order, self.block_order), dtype=np.uint8)
        return expand_block(s, self.block_order)

    def to_base_matrix(self) -> BaseMatrix:
        grid = np.where(self.shifts == ZERO, MASKED, self.shifts)
        origin = Origin.MASKED if self.has_zero_blocks else Origin.SUBMATRIX
        return BaseMatrix(grid, self.block_order, origin)

    def drop_block_columns(self, drop) -> "QcBinaryMatrix":
        keep = [j for j in range(self.block_cols) if j not in set(int(d) for d in drop)]
        return QcBinaryMatrix(self.shifts[:, keep], self.block_order)


@dataclass(frozen=True, eq=False)
class GeneratorRows:
    """Top row of every block-row; the rest follows by section-wise cyclic shifts."""

    rows: np.ndarray
    block_order: int

    def __post_init__(self) -> None:
        r = np.array(self.rows, dtype=np.uint8, copy=True)
        if r.ndim != 2 or r.shape[1] % int(self.block_order):
            raise DimensionMismatchError("generator row length must be a multiple of the block order")
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)

    @property
    def sections(self) -> int:
        return self.rows.shape[1] // self.block_order

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GeneratorRows):
            return NotImplemented
        return self.block_order == other.block_order and np.array_equal(self.rows, other.rows)


def expand_block(s: int, t: int) -> np.ndarray:
    if not 0 <= s < t:
        raise ShiftOutOfRangeError(f"shift {s} outside [0, {t})")
    out = np.zeros((t, t), dtype=np.uint8)
    u = np.arange(t)
    out[u, (u + s) % t] = 1
    return out


def disperse(B: BaseMatrix) -> QcBinaryMatrix:
    shifts = np.where(B.entries == MASKED, ZERO, B.entries)
    return QcBinaryMatrix(shifts, B.modulus)


def section_shift(row: np.ndarray, t: int) -> np.ndarray:
    """Cyclically shift every length-``t`` section of ``row`` one place right."""
    return np.roll(np.asarray(row).reshape(-1, t), 1, axis=1).ravel()


def generator_rows(H: QcBinaryMatrix) -> GeneratorRows:
    t = H.block_order
    out = np.zeros((H.block_rows, H.block_cols * t), dtype=np.uint8)
    bi, bj = np.nonzero(H.shifts != ZERO)
    out[bi, bj * t + H.shifts[bi, bj]] = 1
    return GeneratorRows(out, t)


def expand_generators(G: GeneratorRows) -> QcBinaryMatrix:
    t = G.block_order
    sec = G.rows.reshape(G.rows.shape[0], G.sections, t)
    weight = sec.sum(axis=2)
    bad = np.argwhere(weight > 1)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise SectionWeightExceededError(f"generator row {i}, section {j} has weight {int(weight[i, j])}")
    shifts = np.where(weight == 1, sec.argmax(axis=2), ZERO)
    return QcBinaryMatrix(shifts, t)


def qc_structure_check(M, t: int) -> QcBinaryMatrix:
    """Recover the shift grid of a binary matrix made of order-``t`` CPMs and zero blocks.

    Raises :class:`NotBlockStructuredError` naming the first offending block in
    row-major block order.
    """
    A = as_csr(M)
    m, n = A.shape
    if t < 1 or m % t or n % t:
        raise DimensionMismatchError(f"matrix {m}x{n} is not divisible into blocks of order {t}")
    k, r = m // t, n // t
    rows = np.repeat(np.arange(m), np.diff(A.indptr))
    cols = A.indices.astype(np.int64)
    blk = (rows // t) * r + cols // t
    shift = (cols % t - rows % t) % t
    count = np.bincount(blk, minlength=k * r)
    smin = np.full(k * r, t, dtype=np.int64)
    smax = np.full(k * r, -1, dtype=np.int64)
    np.minimum.at(smin, blk, shift)
    np.maximum.at(smax, blk, shift)
    ok = (count == 0) | ((count == t) & (smin == smax))
    if not ok.all():
        b = int(np.flatnonzero(~ok)[0])
        reason = f"{int(count[b])} ones" if count[b] != t else "mixed shifts"
        raise NotBlockStructuredError((b // r, b % r), reason)
    shifts = np.where(count == 0, ZERO, smin).reshape(k, r)
    return QcBinaryMatrix(shifts, t)
