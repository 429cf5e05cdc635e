"""Tanner graphs: girth and exact short-cycle counts.

Node numbering: variable nodes ``0..n-1``, check nodes ``n..n+m-1``.

Two independent cycle counters are provided.

* ``method="nbt"`` uses the non-backtracking (Hashimoto) operator ``B`` on
  directed edges.  A closed tailless non-backtracking walk shorter than
  twice the girth is a simple cycle traversed once, so for
  ``girth <= L < 2 * girth`` the number of ``L``-cycles is
  ``trace(B**L) / (2 L)``.  For quasi-cyclic matrices the diagonal of
  ``B**L`` is constant on orbits of the cyclic automorphism, so one column
  per orbit suffices.
* ``method="dfs"`` enumerates simple cycles directly, each once, from its
  smallest node with a fixed orientation.  It is exact for every length and
  is the oracle for small graphs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
import scipy.sparse as sp

from ._accel import dispatch, kernel
from .binary import as_csr
from .dispersion import QcBinaryMatrix
from .geometry import geometry_params
from .errors import DeltaIsOneError, NotGQError, UnsupportedLengthError

SUPPORTED_LENGTHS = (4, 6, 8, 10)


@dataclass(frozen=True, eq=False)
class TannerGraph:
    H: sp.csr_matrix
    qc_order: int = 0  # block order when built from a QC matrix, else 0

    @classmethod
    def from_matrix(cls, H) -> "TannerGraph":
        t = H.block_order if isinstance(H, QcBinaryMatrix) else 0
        return cls(as_csr(H), t)

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.n + self.m

    @property
    def n_edges(self) -> int:
        return int(self.H.nnz)

    def var_degrees(self) -> np.ndarray:
        return np.bincount(self.H.indices, minlength=self.n)

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.H.indptr)

    def adjacency(self) -> sp.csr_matrix:
        A = self.H.astype(np.int64)
        M = sp.bmat([[None, A.T], [A, None]], format="csr")
        M.sort_indices()
        return M

    def node_orbit_representatives(self) -> np.ndarray:
        """One node per orbit of the cyclic automorphism (all nodes if not QC)."""
        if not self.qc_order:
            return np.arange(self.n_nodes)
        return np.arange(0, self.n_nodes, self.qc_order)

    def to_dot(self, name: str = "tanner") -> str:
        out = [f"graph {name} {{"]
        for j in range(self.n):
            out.append(f"  v{j} [shape=circle];")
        for i in range(self.m):
            out.append(f"  c{i} [shape=box];")
        for i in range(self.m):
            for j in self.H.indices[self.H.indptr[i]:self.H.indptr[i + 1]]:
                out.append(f"  v{int(j)} -- c{i};")
        out.append("}")
        return "\n".join(out) + "\n"


def _graph(H) -> TannerGraph:
    return H if isinstance(H, TannerGraph) else TannerGraph.from_matrix(H)


# ---------------------------------------------------------------- girth

@kernel
def _girth_nb(ptr, adj, roots, n_nodes):
    best = np.iinfo(np.int64).max
    dist = np.full(n_nodes, -1, dtype=np.int64)
    parent = np.full(n_nodes, -1, dtype=np.int64)
    queue = np.empty(n_nodes, dtype=np.int64)
    for r in roots:
        head = 0
        tail = 1
        queue[0] = r
        dist[r] = 0
        while head < tail:
            u = queue[head]
            head += 1
            if 2 * dist[u] >= best:
                break
            for q in range(ptr[u], ptr[u + 1]):
                w = adj[q]
                if w == parent[u]:
                    continue
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue[tail] = w
                    tail += 1
                else:
                    c = dist[u] + dist[w] + 1
                    if c < best:
                        best = c
        for k in range(tail):
            dist[queue[k]] = -1
            parent[queue[k]] = -1
    return best


def _girth_np(ptr, adj, roots, n_nodes):
    best = np.iinfo(np.int64).max
    deg = np.diff(ptr)
    for r in roots:
        dist = np.full(n_nodes, -1, dtype=np.int64)
        parent = np.full(n_nodes, -1, dtype=np.int64)
        dist[r] = 0
        front = np.array([r], dtype=np.int64)
        d = 0
        while front.size and 2 * d < best:
            src = np.repeat(front, deg[front])
            starts = ptr[front]
            offs = np.arange(src.size) - np.repeat(np.cumsum(deg[front]) - deg[front], deg[front])
            dst = adj[np.repeat(starts, deg[front]) + offs]
            keep = dst != parent[src]
            src, dst = src[keep], dst[keep]
            seen = dist[dst] >= 0
            if seen.any():
                best = min(best, int((d + dist[dst[seen]] + 1).min()))
            new = dst[~seen]
            uniq, first, counts = np.unique(new, return_index=True, return_counts=True)
            if (counts > 1).any():
                best = min(best, 2 * (d + 1))
            dist[uniq] = d + 1
            parent[uniq] = src[~seen][first]
            front = uniq
            d += 1
    return best


def girth(H) -> float:
    """Length of the shortest cycle of the Tanner graph; ``math.inf`` for forests."""
    g = _graph(H)
    A = g.adjacency()
    ptr = A.indptr.astype(np.int64)
    adj = A.indices.astype(np.int64)
    roots = g.node_orbit_representatives().astype(np.int64)
    best = dispatch(_girth_nb, _girth_np)(ptr, adj, roots, g.n_nodes)
    return math.inf if best == np.iinfo(np.int64).max else int(best)


# ---------------------------------------------------------------- cycles

@kernel
def _cycles_dfs_nb(ptr, adj, length, roots, n_nodes):
    on = np.zeros(n_nodes, dtype=np.bool_)
    path = np.empty(length, dtype=np.int64)
    nxt = np.empty(length, dtype=np.int64)
    total = 0
    for r in roots:
        path[0] = r
        on[r] = True
        nxt[0] = ptr[r]
        d = 0
        while d >= 0:
            v = path[d]
            if nxt[d] < ptr[v + 1]:
                w = adj[nxt[d]]
                nxt[d] += 1
                if w <= r or on[w]:
                    continue
                if d + 1 == length - 1:
                    if path[1] < w:
                        lo = ptr[w]
                        hi = ptr[w + 1]
                        k = lo + np.searchsorted(adj[lo:hi], r)
                        if k < hi and adj[k] == r:
                            total += 1
                    continue
                d += 1
                path[d] = w
                on[w] = True
                nxt[d] = ptr[w]
            else:
                on[v] = False
                d -= 1
    return total


def _cycles_dfs_np(ptr, adj, length, roots, n_nodes):
    deg = np.diff(ptr)
    width = int(deg.max(initial=0))
    pad = np.full((n_nodes, width), -1, dtype=np.int64)
    owner = np.repeat(np.arange(n_nodes), deg)
    pad[owner, np.arange(adj.size) - np.repeat(ptr[:-1], deg)] = adj
    total = 0
    for r in roots:
        paths = np.array([[r]], dtype=np.int64)
        for _ in range(length - 1):
            cand = pad[paths[:, -1]]  # (k, width)
            ok = cand > r
            ok &= ~(cand[:, :, None] == paths[:, None, :]).any(axis=2)
            k, s = np.nonzero(ok)
            paths = np.concatenate([paths[k], cand[k, s][:, None]], axis=1)
            if paths.shape[0] == 0:
                break
        if paths.shape[0] == 0:
            continue
        closes = (pad[paths[:, -1]] == r).any(axis=1)
        total += int(np.count_nonzero(closes & (paths[:, 1] < paths[:, -1])))
    return total


def _count_dfs(g: TannerGraph, length: int) -> int:
    A = g.adjacency()
    ptr = A.indptr.astype(np.int64)
    adj = A.indices.astype(np.int64)
    roots = np.arange(g.n_nodes, dtype=np.int64)
    return int(dispatch(_cycles_dfs_nb, _cycles_dfs_np)(ptr, adj, int(length), roots, g.n_nodes))


def _hashimoto(g: TannerGraph) -> tuple[sp.csr_matrix, np.ndarray]:
    """Non-backtracking operator on directed edges and the orbit representatives.

    Directed edge ``2e`` runs from the variable to the check of edge ``e``
    (CSR order of ``H``) and ``2e + 1`` runs back.
    """
    H = g.H
    E = H.nnz
    chk = np.repeat(np.arange(g.m), np.diff(H.indptr))
    var = H.indices.astype(np.int64)
    by_var = np.argsort(var, kind="stable")
    vptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(var, minlength=g.n), out=vptr[1:])
    rows, cols = [], []
    # v -> c (2e) continues to c -> v' (2f + 1) for f != e sharing check c
    cdeg = np.diff(H.indptr)
    e_idx = np.arange(E)
    f_all = np.repeat(H.indptr[:-1][chk], cdeg[chk]) + (
        np.arange(int(cdeg[chk].sum())) - np.repeat(np.cumsum(cdeg[chk]) - cdeg[chk], cdeg[chk])
    )
    e_rep = np.repeat(e_idx, cdeg[chk])
    keep = f_all != e_rep
    rows.append(2 * e_rep[keep])
    cols.append(2 * f_all[keep] + 1)
    # c -> v (2e + 1) continues to v -> c' (2f) for f != e sharing variable v
    vdeg = np.diff(vptr)
    f_pos = np.repeat(vptr[:-1][var], vdeg[var]) + (
        np.arange(int(vdeg[var].sum())) - np.repeat(np.cumsum(vdeg[var]) - vdeg[var], vdeg[var])
    )
    f_all = by_var[f_pos]
    e_rep = np.repeat(e_idx, vdeg[var])
    keep = f_all != e_rep
    rows.append(2 * e_rep[keep] + 1)
    cols.append(2 * f_all[keep])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    # B[x, y] = 1 when y may follow x; the walk is then B applied to the left
    B = sp.csr_matrix((np.ones(r.size, dtype=np.int64), (r, c)), shape=(2 * E, 2 * E))
    if g.qc_order:
        reps_e = np.flatnonzero(chk % g.qc_order == 0)
    else:
        reps_e = e_idx
    reps = np.sort(np.concatenate([2 * reps_e, 2 * reps_e + 1]))
    return B, reps


def _count_nbt(g: TannerGraph, length: int, chunk: int = 512) -> int:
    B, reps = _hashimoto(g)
    BT = B.T.tocsr()
    weight = g.qc_order if g.qc_order else 1
    trace = 0
    for start in range(0, reps.size, chunk):
        cols = reps[start:start + chunk]
        X = sp.csr_matrix(
            (np.ones(cols.size, dtype=np.int64), (cols, np.arange(cols.size))), shape=(B.shape[0], cols.size)
        ).toarray()
        for _ in range(length):
            X = BT @ X
        trace += int(X[cols, np.arange(cols.size)].sum())
    trace *= weight
    if trace % (2 * length):  # pragma: no cover - defensive
        raise AssertionError("closed non-backtracking walk count is not a multiple of 2L")
    return trace // (2 * length)


def count_cycles(H, length: int, method: str = "auto") -> int:
    """Exact number of simple cycles of the given length in the Tanner graph.

    ``method="auto"`` uses the non-backtracking trace whenever it is exact
    (``length < 2 * girth``) and falls back to enumeration otherwise.
    """
    if length not in SUPPORTED_LENGTHS:
        raise UnsupportedLengthError(f"cycle length must be one of {SUPPORTED_LENGTHS}, got {length}")
    g = _graph(H)
    if method == "dfs":
        return _count_dfs(g, length)
    gi = girth(g)
    if length < gi:
        return 0
    if method == "nbt":
        if length >= 2 * gi:
            raise UnsupportedLengthError(f"the trace method is exact only below twice the girth ({2 * gi})")
        return _count_nbt(g, length)
    if method != "auto":
        raise ValueError("method must be 'auto', 'nbt' or 'dfs'")
    return _count_nbt(g, length) if length < 2 * gi else _count_dfs(g, length)


def _params(G) -> tuple[int, int, int]:
    return tuple(int(x) for x in (G.params if hasattr(G, "params") else G))


def _lines(gamma: int, rho: int, delta: int) -> int:
    return geometry_params(gamma, rho, delta)[1]


def cycle6_count_formula(G) -> int:
    """Number of 6-cycles, ``m gamma (gamma-1)(delta-1)(rho-1) / 6``; ``G`` is a descriptor or a triple."""
    gamma, rho, delta = _params(G)
    if delta == 1:
        raise DeltaIsOneError("a generalized quadrangle has no 6-cycles")
    v = Fraction(_lines(gamma, rho, delta) * gamma * (gamma - 1) * (delta - 1) * (rho - 1), 6)
    assert v.denominator == 1
    return int(v)


def cycle6_count_prime(p: int) -> int:
    """6-cycles of the full prime-field array, ``p**3 (p-1)**2 (p-2) / 6``."""
    return p**3 * (p - 1) ** 2 * (p - 2) // 6


def cycle8_count_formula_gq(G) -> int:
    """Number of 8-cycles of a generalized quadrangle, ``m (rho-1)(gamma-1)**2 C(rho, 2) / 4``."""
    gamma, rho, delta = _params(G)
    if delta != 1:
        raise NotGQError(f"connection number is {delta}, not 1")
    v = Fraction(_lines(gamma, rho, delta) * (rho - 1) * (gamma - 1) ** 2 * comb(rho, 2), 4)
    assert v.denominator == 1
    return int(v)


@dataclass(frozen=True)
class CycleReport:
    n: int
    m: int
    girth: float
    counts: dict

    def to_dict(self) -> dict:
        gi = self.girth if math.isfinite(self.girth) else None
        return {"n": self.n, "m": self.m, "girth": gi, "cycles": {str(k): v for k, v in self.counts.items()}}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_table(self) -> str:
        rows = [("length", "count")] + [(str(k), str(v)) for k, v in sorted(self.counts.items())]
        head = f"girth {self.girth if math.isfinite(self.girth) else 'inf'} ({self.m}x{self.n})"
        return head + "\n" + format_table(rows)


def cycle_report(H, lengths=(4, 6, 8), method: str = "auto") -> CycleReport:
    g = _graph(H)
    return CycleReport(g.n, g.m, girth(g), {int(L): count_cycles(g, int(L), method) for L in lengths})


def format_table(rows) -> str:
    """Right-aligned plain-text table; the first row is the header."""
    widths = [max(len(str(r[k])) for r in rows) for k in range(len(rows[0]))]
    lines = ["  ".join(str(c).rjust(w) for c, w in zip(r, widths)) for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
