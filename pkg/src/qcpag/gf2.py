"""GF(2) linear algebra on bit-packed rows: rank, systematic form, encoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._accel import dispatch, kernel
from .binary import WORD_BITS, as_csr, pack_rows, unpack_rows
from .errors import LengthMismatchError


@kernel
def _eliminate_nb(A, n_cols, full):
    m, W = A.shape
    pivots = np.empty(min(m, n_cols), dtype=np.int64)
    rank = 0
    one = np.uint64(1)
    for c in range(n_cols):
        if rank == m:
            break
        w = c // 64
        bit = one << np.uint64(c & 63)
        p = -1
        for i in range(rank, m):
            if A[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != rank:
            for x in range(W):
                tmp = A[p, x]
                A[p, x] = A[rank, x]
                A[rank, x] = tmp
        start = 0 if full else rank + 1
        for i in range(start, m):
            if i != rank and (A[i, w] & bit):
                # rows at or below the pivot are zero left of column c
                for x in range(w, W):
                    A[i, x] ^= A[rank, x]
        pivots[rank] = c
        rank += 1
    return pivots[:rank]


def _eliminate_np(A, n_cols, full):
    m, W = A.shape
    pivots = []
    rank = 0
    for c in range(n_cols):
        if rank == m:
            break
        w = c // WORD_BITS
        bit = np.uint64(1) << np.uint64(c % WORD_BITS)
        hits = np.flatnonzero(A[rank:, w] & bit)
        if hits.size == 0:
            continue
        p = rank + int(hits[0])
        if p != rank:
            A[[rank, p]] = A[[p, rank]]
        targets = np.flatnonzero(A[:, w] & bit)
        targets = targets[targets != rank]
        if not full:
            targets = targets[targets > rank]
        if targets.size:
            A[targets, w:] ^= A[rank, w:]
        pivots.append(c)
        rank += 1
    return np.asarray(pivots, dtype=np.int64)


def eliminate(packed: np.ndarray, n_cols: int, full: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian elimination over GF(2) on a copy of ``packed``.

    Returns ``(reduced, pivot_columns)``.  With ``full=True`` the result is in
    reduced row echelon form; otherwise only forward elimination is done.
    """
    A = np.array(packed, dtype=np.uint64, order="C", copy=True)
    impl = dispatch(_eliminate_nb, _eliminate_np)
    pivots = impl(A, int(n_cols), bool(full))
    return A, np.asarray(pivots, dtype=np.int64)


def gf2_rank(H, by: str = "rows") -> int:
    """Rank over GF(2).

    ``by="rows"`` eliminates the packed rows of ``H``; ``by="columns"``
    eliminates the rows of ``H^T`` instead, an independent route to the same
    number.
    """
    M = as_csr(H)
    if by == "columns":
        M = M.T.tocsr()
    elif by != "rows":
        raise ValueError("by must be 'rows' or 'columns'")
    if M.shape[0] == 0 or M.shape[1] == 0:
        return 0
    _, piv = eliminate(pack_rows(M), M.shape[1], full=False)
    return int(piv.size)


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Null space of a parity-check matrix, with a systematic encoder.

    ``info_cols`` are the message positions; the bit at ``pivot_cols[i]`` is the
    parity ``parity_map[i] . message``.
    """

    H: sp.csr_matrix
    rank: int
    pivot_cols: np.ndarray
    info_cols: np.ndarray
    parity_map: np.ndarray

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def k(self) -> int:
        return self.n - self.rank

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def permutation(self) -> np.ndarray:
        """Column order putting ``H`` (after row reduction) in the form ``[P | I]``."""
        return np.concatenate([self.info_cols, self.pivot_cols])

    @classmethod
    def from_parity_matrix(cls, H) -> "LinearCode":
        M = as_csr(H)
        m, n = M.shape
        R, piv = eliminate(pack_rows(M), n, full=True)
        rank = piv.size
        is_pivot = np.zeros(n, dtype=bool)
        is_pivot[piv] = True
        info = np.flatnonzero(~is_pivot)
        parity = unpack_rows(R[:rank], n)[:, info] if rank else np.zeros((0, info.size), np.uint8)
        return cls(M, int(rank), piv, info, np.ascontiguousarray(parity, dtype=np.uint8))

    def generator_matrix(self, packed: bool = False) -> np.ndarray:
        """``k x n`` generator with ``G H^T = 0`` and identity on ``info_cols``."""
        G = np.zeros((self.k, self.n), dtype=np.uint8)
        G[np.arange(self.k), self.info_cols] = 1
        G[:, self.pivot_cols] = self.parity_map.T
        return pack_rows(G) if packed else G

    def encode(self, message) -> np.ndarray:
        msg = np.asarray(message, dtype=np.uint8).ravel()
        if msg.size != self.k:
            raise LengthMismatchError(f"message length {msg.size} != k = {self.k}")
        word = np.zeros(self.n, dtype=np.uint8)
        word[self.info_cols] = msg & 1
        # uint8 products wrap mod 256, which keeps the parity
        word[self.pivot_cols] = (self.parity_map @ (msg & 1)) & 1
        return word


def systematic_form(H, packed: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(column_permutation, generator_matrix)`` for the null space of ``H``."""
    code = LinearCode.from_parity_matrix(H)
    return code.permutation, code.generator_matrix(packed=packed)


def encode(code: LinearCode, message) -> np.ndarray:
    return code.encode(message)


def syndrome(H, word) -> np.ndarray:
    M = as_csr(H)
    w = np.asarray(word).ravel()
    if w.size != M.shape[1]:
        raise LengthMismatchError(f"word length {w.size} != n = {M.shape[1]}")
    return (np.asarray(M @ (w & 1).astype(np.int64)) & 1).astype(np.uint8)


def is_codeword(H, word) -> bool:
    return not syndrome(H, word).any()
