"""Partial-geometry certification, bundles, subgeometries and protographs.

Rows of an incidence matrix are lines and columns are points.  Three
certificates are available:

* :func:`verify_theorem1` for a ``gamma x rho`` array of ``gamma x gamma``
  CPMs satisfying the RC-constraint (connection number ``rho - 1``);
* :func:`verify_theorem2` for any CPM array, by checking the matrices
  ``G(i, j) = H D(i, j) H^T`` in the shift domain;
* :func:`verify_definition`, a brute-force check of the four axioms used as
  the oracle for the other two.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Union

import numpy as np
import scipy.sparse as sp

from .base import MASKED, BaseMatrix
from .binary import as_csr
from .dispersion import ZERO, QcBinaryMatrix
from .errors import (
    AxiomViolationError,
    ContainsZeroBlockError,
    DiagonalMismatchError,
    EntryOutOfRangeError,
    IndexOutOfRangeError,
    NonIntegralError,
    NotBlockCertifiedError,
    RcViolationError,
    TooLargeError,
    TooManyDroppedError,
    TwosCountMismatchError,
    WrongShapeError,
)

Incidence = Union[QcBinaryMatrix, sp.csr_matrix]


class Certification(str, enum.Enum):
    THEOREM1 = "Theorem1"
    THEOREM2 = "Theorem2"
    DEFINITION = "DefinitionCheck"


@dataclass(frozen=True, eq=False)
class GeometryDescriptor:
    gamma: int
    rho: int
    delta: int
    n_points: int
    m_lines: int
    certification: Certification
    incidence: Incidence
    source: str = ""
    detail: dict = field(default_factory=dict)

    @property
    def params(self) -> tuple[int, int, int]:
        return self.gamma, self.rho, self.delta

    @property
    def is_net(self) -> bool:
        return self.delta == self.gamma - 1

    @property
    def is_gq(self) -> bool:
        return self.delta == 1

    @property
    def block_certified(self) -> bool:
        return isinstance(self.incidence, QcBinaryMatrix) and self.certification in (
            Certification.THEOREM1,
            Certification.THEOREM2,
        )

    def csr(self) -> sp.csr_matrix:
        return as_csr(self.incidence)

    def lines(self) -> list[tuple[int, ...]]:
        """Point sets of all lines, in row order."""
        A = self.csr()
        return [tuple(int(x) for x in A.indices[A.indptr[i]:A.indptr[i + 1]]) for i in range(A.shape[0])]

    def points_to_lines(self) -> list[tuple[int, ...]]:
        C = self.csr().tocsc()
        C.sort_indices()
        return [tuple(int(x) for x in C.indices[C.indptr[j]:C.indptr[j + 1]]) for j in range(C.shape[1])]

    def to_dict(self) -> dict[str, Any]:
        inc = self.incidence
        ref: dict[str, Any] = {"shape": list(inc.shape), "source": self.source}
        if isinstance(inc, QcBinaryMatrix):
            ref["block_order"] = inc.block_order
            ref["shifts"] = inc.shifts.tolist()
        return {
            "gamma": self.gamma,
            "rho": self.rho,
            "delta": self.delta,
            "n_points": self.n_points,
            "m_lines": self.m_lines,
            "certification": self.certification.value,
            "is_net": self.is_net,
            "detail": self.detail,
            "matrix": ref,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def geometry_params(gamma: int, rho: int, delta: int) -> tuple[int, int]:
    """Point and line counts ``(n, m)`` of PaG(gamma, rho, delta)."""
    if gamma < 2 or rho < 2 or delta < 1:
        raise NonIntegralError(f"need gamma, rho >= 2 and delta >= 1, got ({gamma}, {rho}, {delta})")
    core = (rho - 1) * (gamma - 1) + delta
    n = Fraction(rho * core, delta)
    m = Fraction(gamma * core, delta)
    if n.denominator != 1 or m.denominator != 1:
        raise NonIntegralError(f"PaG({gamma}, {rho}, {delta}) has non-integral point/line counts")
    return int(n), int(m)


@dataclass(frozen=True)
class RcResult:
    passed: bool
    rows: tuple[int, int] | None = None
    cols: tuple[int, int] | None = None

    def __bool__(self) -> bool:
        return self.passed


def _rc_check_qc(H: QcBinaryMatrix) -> RcResult:
    t = H.block_order
    a = H.shifts
    k = a.shape[0]
    for r1 in range(k):
        for r2 in range(r1 + 1, k):
            both = np.flatnonzero((a[r1] != ZERO) & (a[r2] != ZERO))
            if both.size < 2:
                continue
            d = (a[r1, both] - a[r2, both]) % t
            order = np.argsort(d, kind="stable")
            dup = np.flatnonzero(np.diff(d[order]) == 0)
            if dup.size:
                u, w = sorted((int(both[order[dup[0]]]), int(both[order[dup[0] + 1]])))
                # row 0 of block r1 meets row d_u of block r2 in both block-columns u and w
                rows = (r1 * t, r2 * t + int(d[order[dup[0]]]))
                cols = (u * t + int(a[r1, u]), w * t + int(a[r1, w]))
                return RcResult(False, rows, cols)
    return RcResult(True)


def rc_constraint_check(H) -> RcResult:
    """Pass iff no two rows share more than one 1-position.

    Quasi-cyclic inputs are checked on the shift grid without expansion.
    """
    if isinstance(H, QcBinaryMatrix):
        return _rc_check_qc(H)
    A = as_csr(H).astype(np.int32)
    S = (A @ A.T).tocoo()
    off = (S.row < S.col) & (S.data > 1)
    if not off.any():
        return RcResult(True)
    idx = np.flatnonzero(off)
    first = idx[np.lexsort((S.col[idx], S.row[idx]))[0]]
    i, j = int(S.row[first]), int(S.col[first])
    shared = np.intersect1d(A.indices[A.indptr[i]:A.indptr[i + 1]], A.indices[A.indptr[j]:A.indptr[j + 1]])
    return RcResult(False, (i, j), (int(shared[0]), int(shared[1])))


def _require_qc(H) -> QcBinaryMatrix:
    if not isinstance(H, QcBinaryMatrix):
        raise WrongShapeError("expected a QcBinaryMatrix (use qc_structure_check to recover the blocks)")
    return H


def verify_theorem1(H: QcBinaryMatrix, source: str = "") -> GeometryDescriptor:
    H = _require_qc(H)
    gamma, rho, t = H.block_rows, H.block_cols, H.block_order
    if t != gamma:
        raise WrongShapeError(f"block order {t} must equal the number of block rows {gamma}")
    if gamma < 2 or rho < 2:
        raise WrongShapeError(f"need at least 2 block rows and columns, got {gamma}x{rho}")
    if H.has_zero_blocks:
        raise ContainsZeroBlockError("Theorem-1 arrays consist of CPMs only")
    rc = rc_constraint_check(H)
    if not rc:
        raise RcViolationError(rc.rows, rc.cols)
    delta = rho - 1
    n, m = geometry_params(gamma, rho, delta)
    return GeometryDescriptor(gamma, rho, delta, n, m, Certification.THEOREM1, H, source)


def _difference_counts(a: np.ndarray, t: int) -> np.ndarray:
    """``C[r, s, x]`` = multiplicity of shift ``x`` in block ``(r, s)`` of ``H H^T``."""
    k, r = a.shape
    C = np.zeros((k, k, t), dtype=np.int64)
    ri, si = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
    for u in range(r):
        d = (a[:, u][:, None] - a[:, u][None, :]) % t
        np.add.at(C, (ri, si, d), 1)
    return C


def verify_theorem2(
    H: QcBinaryMatrix,
    delta: int | None = None,
    mode: str = "fast",
    samples: int = 64,
    seed: int = 0,
    source: str = "",
) -> GeometryDescriptor:
    """Certify a CPM array through the matrices ``G(i, j) = H D(i, j) H^T``.

    ``D(i, j)`` adds ``P**j`` to block-column ``i`` (``1 <= j < t``).  Every row
    of ``G(i, j)`` must have diagonal ``rho``, exactly ``delta`` entries equal
    to 2 and all other entries in {0, 1}.  Each product of CPMs is a CPM, so
    ``G(i, j)`` is accumulated as shift multiplicities per block and all rows of
    a block-row are checked at once.

    ``mode="fast"`` checks ``samples`` random pairs ``(i, j)``; ``mode=
    "exhaustive"`` checks all of them.  When ``delta`` is None it is inferred
    from the first pair and then enforced.
    """
    H = _require_qc(H)
    if H.has_zero_blocks:
        raise ContainsZeroBlockError("Theorem 2 does not allow zero blocks; use verify_definition")
    a = H.shifts
    k, r, t = H.block_rows, H.block_cols, H.block_order
    if t < 2:
        raise WrongShapeError("block order must be at least 2")
    C = _difference_counts(a, t)
    rows_idx = np.arange(k)
    diag_val = C[rows_idx, rows_idx, 0]
    if not (diag_val == r).all():
        raise DiagonalMismatchError(f"diagonal of H H^T is {diag_val.tolist()}, expected {r}")
    off = C.copy()
    off[rows_idx, rows_idx, 0] = 0
    base_twos = (off == 2).sum(axis=(1, 2))
    base_over = (off > 2).sum(axis=(1, 2))

    pairs = [(i, j) for i in range(r) for j in range(1, t)]
    if mode == "fast" and samples < len(pairs):
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(len(pairs), size=samples, replace=False))
        pairs = [pairs[p] for p in pick]
    elif mode not in ("fast", "exhaustive"):
        raise ValueError("mode must be 'fast' or 'exhaustive'")

    by_col: dict[int, list[int]] = {}
    for i, j in pairs:
        by_col.setdefault(i, []).append(j)
    for i in sorted(by_col):
        js = np.asarray(by_col[i], dtype=np.int64)
        col = a[:, i]
        # extra shift added to block (row-block rr, col-block ss) for every j
        e = (col[None, :, None] + js[:, None, None] - col[None, None, :]) % t
        v = C[rows_idx[None, :, None], rows_idx[None, None, :], e]
        twos = base_twos[None, :] + (v == 1).sum(axis=2) - (v == 2).sum(axis=2)
        over = base_over[None, :] + (v == 2).sum(axis=2)
        if delta is None:
            delta = int(twos[0, 0])
        bad_over = np.argwhere(over > 0)
        bad_twos = np.argwhere(twos != delta)
        if bad_over.size or bad_twos.size:
            cands = [tuple(x) for x in bad_over] + [tuple(x) for x in bad_twos]
            jj, rr = min(cands)
            pair = (int(i), int(js[jj]))
            if over[jj, rr] > 0:
                raise EntryOutOfRangeError(f"row {rr * t} of G{pair} has an off-diagonal entry above 2")
            raise TwosCountMismatchError(int(rr * t), int(twos[jj, rr]), int(delta), pair)
    if delta is None or delta < 1:
        raise TwosCountMismatchError(0, 0 if delta is None else int(delta), 1)
    gamma, rho = k, r
    try:
        n, m = geometry_params(gamma, rho, delta)
    except NonIntegralError as exc:
        raise WrongShapeError(str(exc)) from exc
    if (m, n) != H.shape:
        raise WrongShapeError(f"PaG({gamma}, {rho}, {delta}) needs {m}x{n}, matrix is {H.shape}")
    detail = {"mode": mode, "pairs_checked": len(pairs), "pairs_total": r * (t - 1)}
    return GeometryDescriptor(gamma, rho, int(delta), n, m, Certification.THEOREM2, H, source, detail)


def verify_definition(H, max_points: int = 10_000, source: str = "") -> GeometryDescriptor:
    """Brute-force check of the partial-geometry axioms; infers ``delta``.

    Axiom ids: 1 two points share at most one line, 2 every point is on gamma
    lines, 3 every line has rho points, 4 a point off a line is joined to it by
    exactly delta lines.  Cost is O(n m rho); ``max_points`` guards it.
    """
    A = as_csr(H)
    m, n = A.shape
    if n > max_points:
        raise TooLargeError(f"{n} points exceeds max_points={max_points}")
    colw = np.bincount(A.indices, minlength=n)
    roww = np.diff(A.indptr)
    gamma = int(colw[0]) if n else 0
    bad = np.flatnonzero(colw != gamma)
    if bad.size or gamma < 2:
        j = int(bad[0]) if bad.size else 0
        raise AxiomViolationError(2, (j,), f"point {j} is on {int(colw[j])} lines, point 0 on {gamma}")
    rho = int(roww[0]) if m else 0
    bad = np.flatnonzero(roww != rho)
    if bad.size or rho < 2:
        i = int(bad[0]) if bad.size else 0
        raise AxiomViolationError(3, (i,), f"line {i} has {int(roww[i])} points, line 0 has {rho}")
    P = (A.T @ A).astype(np.int32).tocsr()
    P.setdiag(0)
    P.eliminate_zeros()
    if P.nnz and P.data.max() > 1:
        coo = P.tocoo()
        hit = np.flatnonzero((coo.data > 1) & (coo.row < coo.col))[0]
        raise AxiomViolationError(1, (int(coo.row[hit]), int(coo.col[hit])), "points share two lines")
    adj = P  # 0/1 point adjacency
    delta = None
    chunk = max(1, 2_000_000 // max(n, 1))
    Ad = A.astype(np.int32)
    for start in range(0, m, chunk):
        stop = min(m, start + chunk)
        joined = (Ad[start:stop] @ adj).toarray()  # lines x points: points of L adjacent to v
        on_line = Ad[start:stop].toarray().astype(bool)
        vals = np.where(on_line, -1, joined)
        if delta is None:
            first = np.argwhere(~on_line)
            if first.size == 0:
                continue
            delta = int(vals[tuple(first[0])])
        wrong = np.argwhere((vals != delta) & ~on_line)
        if wrong.size:
            li, v = (int(x) for x in wrong[0])
            raise AxiomViolationError(
                4, (v, start + li), f"point {v} joined to line {start + li} by {int(vals[li, v])} lines, not {delta}"
            )
    if delta is None or delta < 1:
        raise AxiomViolationError(4, (), f"connection number {delta} is not positive")
    n_exp, m_exp = geometry_params(gamma, rho, delta)
    if (n_exp, m_exp) != (n, m):
        raise AxiomViolationError(4, (n, m), f"counts disagree with PaG({gamma}, {rho}, {delta})")
    incidence = H if isinstance(H, QcBinaryMatrix) else A
    return GeometryDescriptor(gamma, rho, delta, n, m, Certification.DEFINITION, incidence, source)


class BundleKind(str, enum.Enum):
    PARALLEL = "Parallel"
    INTERSECTING = "Intersecting"


@dataclass(frozen=True)
class Bundle:
    kind: BundleKind
    lines: tuple[int, ...]
    anchor: int | None = None


def parallel_bundles(G: GeometryDescriptor) -> list[Bundle]:
    """One parallel bundle per block-row of a block-certified geometry."""
    if not G.block_certified:
        raise NotBlockCertifiedError("parallel bundles need a Theorem-1/2 certified CPM array")
    H: QcBinaryMatrix = G.incidence  # type: ignore[assignment]
    t = H.block_order
    A = G.csr()
    bundles = []
    for i in range(H.block_rows):
        lines = tuple(range(i * t, (i + 1) * t))
        cover = np.bincount(A[list(lines)].indices, minlength=A.shape[1])
        if cover.max() > 1:
            raise NotBlockCertifiedError(f"block-row {i} lines are not pairwise disjoint")
        bundles.append(Bundle(BundleKind.PARALLEL, lines))
    return bundles


def intersecting_bundle(G: GeometryDescriptor, point: int) -> Bundle:
    if not 0 <= point < G.n_points:
        raise IndexOutOfRangeError(f"point {point} outside [0, {G.n_points})")
    C = G.csr().tocsc()
    C.sort_indices()
    lines = tuple(int(x) for x in C.indices[C.indptr[point]:C.indptr[point + 1]])
    return Bundle(BundleKind.INTERSECTING, lines, point)


def extract_subgeometry(G: GeometryDescriptor, drop) -> GeometryDescriptor:
    """Delete block-columns of a Theorem-1 geometry; gives PaG(gamma, rho - tau, rho - tau - 1)."""
    if not G.block_certified:
        raise NotBlockCertifiedError("subgeometry extraction needs a block-certified geometry")
    H: QcBinaryMatrix = G.incidence  # type: ignore[assignment]
    drop = sorted(set(int(d) for d in drop))
    if any(not 0 <= d < H.block_cols for d in drop):
        raise IndexOutOfRangeError("block-column index out of range")
    if len(drop) >= G.rho - 1:
        raise TooManyDroppedError(f"dropping {len(drop)} of {G.rho} block-columns leaves no geometry")
    if not drop:
        return G
    sub = H.drop_block_columns(drop)
    out = verify_theorem1(sub, source=f"{G.source} minus block-columns {drop}".strip())
    return out


@dataclass(frozen=True)
class Protograph:
    """Labeled bipartite base graph; edge ``(vn j, cn i, k)`` carries CPM shift ``k``."""

    vn_count: int
    cn_count: int
    edges: tuple[tuple[int, int, int], ...]
    block_order: int

    def lift(self) -> QcBinaryMatrix:
        """Connect ``block_order`` copies according to the labels."""
        t = self.block_order
        m, n = self.cn_count * t, self.vn_count * t
        dense = np.zeros((m, n), dtype=np.uint8)
        for vn, cn, label in self.edges:
            for copy in range(t):
                dense[cn * t + copy, vn * t + (copy + label) % t] = 1
        shifts = np.full((self.cn_count, self.vn_count), ZERO, dtype=np.int64)
        for vn, cn, label in self.edges:
            shifts[cn, vn] = label
        lifted = QcBinaryMatrix(shifts, t)
        if not np.array_equal(lifted.to_dense(), dense):  # pragma: no cover - defensive
            raise AssertionError("protograph lift disagrees with its shift grid")
        return lifted

    def to_dot(self, name: str = "protograph") -> str:
        out = [f"graph {name} {{", "  rankdir=TB;"]
        for j in range(self.vn_count):
            out.append(f'  v{j} [label="Phi{j}", shape=circle];')
        for i in range(self.cn_count):
            out.append(f'  c{i} [label="Omega{i}", shape=box];')
        for vn, cn, label in self.edges:
            out.append(f'  v{vn} -- c{cn} [label="({label})"];')
        out.append("}")
        return "\n".join(out) + "\n"


def protograph(B: BaseMatrix) -> Protograph:
    edges = tuple(
        (int(j), int(i), int(B.entries[i, j]))
        for j in range(B.cols)
        for i in range(B.rows)
        if B.entries[i, j] != MASKED
    )
    return Protograph(B.cols, B.rows, edges, B.modulus)


def tanner_dot(H, name: str = "tanner") -> str:
    A = as_csr(H)
    out = [f"graph {name} {{"]
    for i in range(A.shape[0]):
        for j in A.indices[A.indptr[i]:A.indptr[i + 1]]:
            out.append(f"  v{int(j)} -- c{i};")
    out.append("}")
    return "\n".join(out) + "\n"
