"""Binary matrix plumbing: coercion to CSR and machine-word bit packing.

Packed layout (fixed, platform independent): each row becomes
``ceil(n / 64)`` little-endian ``uint64`` words, word ``w`` holding columns
``64*w .. 64*w + 63`` with column ``64*w + b`` at bit ``b`` (LSB first).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

WORD_BITS = 64


def as_csr(H) -> sp.csr_matrix:
    """Coerce a dense array, scipy sparse matrix or QcBinaryMatrix to 0/1 CSR."""
    to_csr = getattr(H, "to_csr", None)
    if to_csr is not None and not sp.issparse(H):
        return to_csr()
    if sp.issparse(H):
        M = sp.csr_matrix(H, dtype=np.int8, copy=True)
    else:
        M = sp.csr_matrix(np.asarray(H) != 0, dtype=np.int8)
    M.sum_duplicates()
    M.eliminate_zeros()
    M.data[:] = 1
    M.sort_indices()
    return M


def as_dense(H) -> np.ndarray:
    if sp.issparse(H) or hasattr(H, "to_csr"):
        return as_csr(H).toarray().astype(np.uint8)
    return (np.asarray(H) != 0).astype(np.uint8)


def n_words(n_cols: int) -> int:
    return (n_cols + WORD_BITS - 1) // WORD_BITS


def pack_rows(H) -> np.ndarray:
    """Bit-pack the rows of a binary matrix into ``uint64`` words (LSB first)."""
    M = as_csr(H)
    m, n = M.shape
    out = np.zeros((m, n_words(n)), dtype=np.uint64)
    rows = np.repeat(np.arange(m), np.diff(M.indptr))
    cols = M.indices.astype(np.int64)
    bits = np.left_shift(np.uint64(1), (cols % WORD_BITS).astype(np.uint64))
    np.bitwise_or.at(out, (rows, cols // WORD_BITS), bits)
    return out


def unpack_rows(packed: np.ndarray, n_cols: int) -> np.ndarray:
    """Inverse of :func:`pack_rows`, returning a dense ``uint8`` matrix."""
    packed = np.ascontiguousarray(packed, dtype=np.uint64)
    as_bytes = packed.astype("<u8").view(np.uint8).reshape(packed.shape[0], -1)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :n_cols].copy()


def column_weights(H) -> np.ndarray:
    M = as_csr(H)
    return np.bincount(M.indices, minlength=M.shape[1])


def row_weights(H) -> np.ndarray:
    return np.diff(as_csr(H).indptr)
