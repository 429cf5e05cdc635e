"""MacKay alist format for sparse parity-check matrices.

Layout::

    n m
    max_col_degree max_row_degree
    <n column degrees>
    <m row degrees>
    <n lines: 1-based row indices of each column, zero padded>
    <m lines: 1-based column indices of each row, zero padded>
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .binary import as_csr
from .errors import FormatError


def dumps(H) -> str:
    A = as_csr(H)
    m, n = A.shape
    C = A.tocsc()
    C.sort_indices()
    col_deg = np.diff(C.indptr)
    row_deg = np.diff(A.indptr)
    max_c = int(col_deg.max(initial=0))
    max_r = int(row_deg.max(initial=0))

    def padded(idx: np.ndarray, width: int) -> str:
        # an empty column or row still gets one "0" so that no line is blank
        vals = [str(int(x) + 1) for x in idx] + ["0"] * (max(width, 1) - idx.size)
        return " ".join(vals)

    out = [f"{n} {m}", f"{max_c} {max_r}", " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for j in range(n):
        out.append(padded(C.indices[C.indptr[j]:C.indptr[j + 1]], max_c))
    for i in range(m):
        out.append(padded(A.indices[A.indptr[i]:A.indptr[i + 1]], max_r))
    return "\n".join(out) + "\n"


def loads(text: str) -> sp.csr_matrix:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        col_deg = [int(x) for x in lines[2]]
        row_deg = [int(x) for x in lines[3]]
    except (IndexError, ValueError) as exc:
        raise FormatError("truncated or malformed alist header") from exc
    if n <= 0 or m <= 0 or len(col_deg) != n or len(row_deg) != m:
        raise FormatError("alist degree lists do not match the declared dimensions")
    if len(lines) < 4 + n:
        raise FormatError("alist is missing column index lines")
    rows, cols = [], []
    for j in range(n):
        idx = [int(x) for x in lines[4 + j] if x != "0"]
        if len(idx) != col_deg[j]:
            raise FormatError(f"column {j} lists {len(idx)} entries, degree says {col_deg[j]}")
        for i in idx:
            if not 1 <= i <= m:
                raise FormatError(f"row index {i} out of range in column {j}")
            rows.append(i - 1)
            cols.append(j)
    H = sp.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(m, n))
    H.sort_indices()
    if len(lines) >= 4 + n + m:
        # cross-check the row section when present
        for i in range(m):
            idx = sorted(int(x) - 1 for x in lines[4 + n + i] if x != "0")
            if idx != H.indices[H.indptr[i]:H.indptr[i + 1]].tolist():
                raise FormatError(f"row {i} list disagrees with the column lists")
    if H.max() > 1:
        raise FormatError("duplicate entries in alist")
    return H


def write(H, path: str | Path) -> None:
    Path(path).write_text(dumps(H))


def read(path: str | Path) -> sp.csr_matrix:
    return loads(Path(path).read_text())
