"""Flooding min-sum and sum-product decoders.

Edges are numbered in CSR order of ``H`` (row-major).  Each iteration runs a
check-node update, a variable-node update with hard decision, then a syndrome
test; a frame stops at the first iteration whose hard decision is a codeword.
Channel LLRs and all messages are clamped to ``+-clamp``.  A total LLR of
exactly 0 decides bit 0.

The numba kernels decode one frame at a time.  The numpy fallback works on a
padded layout and decodes a whole batch of frames at once; for min-sum both
give bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import get_backend, kernel
from .binary import as_csr
from .errors import ConfigInvalidError, LengthMismatchError

MSA, SPA = 0, 1
_ALGORITHMS = {"msa": MSA, "spa": SPA}


@dataclass(frozen=True, eq=False)
class DecoderGraph:
    m: int
    n: int
    chk_ptr: np.ndarray  # (m+1,) CSR pointers of H
    edge_var: np.ndarray  # (E,) column of each edge
    var_ptr: np.ndarray  # (n+1,)
    var_edge: np.ndarray  # (E,) edges grouped by column, row order inside
    chk_pad: np.ndarray  # (m, dc_max) edge ids, padded with E
    var_pad: np.ndarray  # (n, dv_max) edge ids, padded with E

    @property
    def n_edges(self) -> int:
        return int(self.edge_var.size)

    @classmethod
    def from_matrix(cls, H) -> "DecoderGraph":
        A = as_csr(H)
        m, n = A.shape
        E = A.nnz
        edge_var = A.indices.astype(np.int64)
        chk_ptr = A.indptr.astype(np.int64)
        var_edge = np.argsort(edge_var, kind="stable").astype(np.int64)
        var_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(edge_var, minlength=n), out=var_ptr[1:])
        return cls(m, n, chk_ptr, edge_var, var_ptr, var_edge, _pad(chk_ptr, np.arange(E), E), _pad(var_ptr, var_edge, E))


def _pad(ptr: np.ndarray, items: np.ndarray, fill: int) -> np.ndarray:
    deg = np.diff(ptr)
    width = int(deg.max(initial=0))
    out = np.full((deg.size, width), fill, dtype=np.int64)
    owner = np.repeat(np.arange(deg.size), deg)
    slot = np.arange(items.size) - np.repeat(ptr[:-1], deg)
    out[owner, slot] = items
    return out


@dataclass(frozen=True)
class DecodeOutcome:
    word: np.ndarray
    converged: bool
    iterations: int


@kernel
def _clip(x, c):
    if x > c:
        return c
    if x < -c:
        return -c
    return x


@kernel
def _frame_nb(chk_ptr, edge_var, var_ptr, var_edge, llr, max_iter, algo, alpha, clamp, word, c2v, v2c, buf):
    m = chk_ptr.size - 1
    n = var_ptr.size - 1
    ch = np.empty(n)
    for j in range(n):
        ch[j] = _clip(llr[j], clamp)
    for e in range(edge_var.size):
        v2c[e] = ch[edge_var[e]]
    for it in range(1, max_iter + 1):
        for i in range(m):
            lo = chk_ptr[i]
            hi = chk_ptr[i + 1]
            if algo == 0:
                min1 = np.inf
                min2 = np.inf
                arg = -1
                parity = 0
                for e in range(lo, hi):
                    x = v2c[e]
                    a = abs(x)
                    if x < 0:
                        parity ^= 1
                    if a < min1:
                        min2 = min1
                        min1 = a
                        arg = e
                    elif a < min2:
                        min2 = a
                for e in range(lo, hi):
                    mag = alpha * (min2 if e == arg else min1)
                    neg = parity ^ (1 if v2c[e] < 0 else 0)
                    c2v[e] = _clip(-mag if neg else mag, clamp)
            else:
                # leave-one-out tanh products via prefix/suffix sweeps
                # c2v holds tanh(v2c / 2) until the backward sweep overwrites it
                p = 1.0
                for e in range(lo, hi):
                    buf[e - lo] = p
                    c2v[e] = np.tanh(0.5 * v2c[e])
                    p *= c2v[e]
                s = 1.0
                for e in range(hi - 1, lo - 1, -1):
                    th = c2v[e]
                    c2v[e] = _clip(2.0 * np.arctanh(buf[e - lo] * s), clamp)
                    s *= th
        for j in range(n):
            s = 0.0
            for q in range(var_ptr[j], var_ptr[j + 1]):
                s += c2v[var_edge[q]]
            total = ch[j] + s
            word[j] = 1 if total < 0 else 0
            for q in range(var_ptr[j], var_ptr[j + 1]):
                e = var_edge[q]
                v2c[e] = _clip(total - c2v[e], clamp)
        ok = True
        for i in range(m):
            par = 0
            for e in range(chk_ptr[i], chk_ptr[i + 1]):
                par ^= word[edge_var[e]]
            if par:
                ok = False
                break
        if ok:
            return it, True
    return max_iter, False


@kernel
def _batch_nb(chk_ptr, edge_var, var_ptr, var_edge, llrs, max_iter, algo, alpha, clamp, words, iters, conv):
    E = edge_var.size
    c2v = np.empty(E)
    v2c = np.empty(E)
    dc = 0
    for i in range(chk_ptr.size - 1):
        dc = max(dc, chk_ptr[i + 1] - chk_ptr[i])
    buf = np.empty(dc)
    for b in range(llrs.shape[0]):
        it, ok = _frame_nb(
            chk_ptr, edge_var, var_ptr, var_edge, llrs[b], max_iter, algo, alpha, clamp, words[b], c2v, v2c, buf
        )
        iters[b] = it
        conv[b] = ok


def _batch_np(g: DecoderGraph, llrs, max_iter, algo, alpha, clamp, words, iters, conv):
    B = llrs.shape[0]
    E = g.n_edges
    ch = np.clip(llrs, -clamp, clamp)
    pad_c = g.chk_pad == E
    var_of_edge = g.edge_var
    active = np.arange(B)
    v2c = np.zeros((B, E + 1))
    v2c[:, :E] = ch[:, var_of_edge]
    c2v = np.zeros((B, E + 1))  # column E stays 0 for padding
    for it in range(1, max_iter + 1):
        X = v2c[active][:, g.chk_pad]  # (b, m, dc); padded slots read 0
        real = ~pad_c
        if algo == MSA:
            A = np.abs(X)
            A[:, pad_c] = np.inf
            arg = A.argmin(axis=2)
            min1 = np.take_along_axis(A, arg[..., None], axis=2)[..., 0]
            np.put_along_axis(A, arg[..., None], np.inf, axis=2)
            min2 = A.min(axis=2)
            neg = X < 0
            parity = np.bitwise_xor.reduce(neg, axis=2)
            slot = np.arange(X.shape[2])
            mag = alpha * np.where(slot[None, None, :] == arg[..., None], min2[..., None], min1[..., None])
            out = np.where(neg ^ parity[..., None], -mag, mag)
        else:
            T = np.tanh(0.5 * X)
            T[:, pad_c] = 1.0
            ones = np.ones(T.shape[:2] + (1,))
            prefix = np.concatenate([ones, np.cumprod(T, axis=2)[..., :-1]], axis=2)
            suffix = np.concatenate([np.cumprod(T[..., ::-1], axis=2)[..., ::-1][..., 1:], ones], axis=2)
            with np.errstate(divide="ignore"):
                out = 2.0 * np.arctanh(prefix * suffix)
        cv = np.zeros((active.size, E + 1))
        cv[:, g.chk_pad[real]] = np.clip(out[:, real], -clamp, clamp)
        c2v[active] = cv
        G = cv[:, g.var_pad]  # (b, n, dv)
        s = np.zeros(G.shape[:2])
        for k in range(G.shape[2]):
            s = s + G[:, :, k]
        total = ch[active] + s
        w = (total < 0).astype(np.uint8)
        words[active] = w
        nv = np.zeros((active.size, E + 1))
        nv[:, :E] = np.clip(total[:, var_of_edge] - cv[:, :E], -clamp, clamp)
        v2c[active] = nv
        wpad = np.zeros((active.size, E + 1), dtype=np.uint8)
        wpad[:, :E] = w[:, var_of_edge]
        bad = np.bitwise_xor.reduce(wpad[:, g.chk_pad], axis=2).any(axis=1)
        done = active[~bad]
        iters[done] = it
        conv[done] = True
        active = active[bad]
        if active.size == 0:
            break
    iters[active] = max_iter
    conv[active] = False


def _graph(H) -> DecoderGraph:
    return H if isinstance(H, DecoderGraph) else DecoderGraph.from_matrix(H)


def decode_batch(
    H,
    llrs,
    max_iter: int = 50,
    algorithm: str = "msa",
    attenuation: float = 1.0,
    clamp: float = 30.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode each row of ``llrs``; returns ``(words, converged, iterations)``."""
    g = _graph(H)
    L = np.ascontiguousarray(llrs, dtype=np.float64)
    if L.ndim != 2 or L.shape[1] != g.n:
        raise LengthMismatchError(f"expected LLR rows of length {g.n}, got shape {L.shape}")
    if max_iter < 1:
        raise ConfigInvalidError("max_iter must be at least 1")
    if not 0.0 < attenuation <= 1.0:
        raise ConfigInvalidError("attenuation must lie in (0, 1]")
    if algorithm not in _ALGORITHMS:
        raise ConfigInvalidError(f"algorithm must be one of {sorted(_ALGORITHMS)}")
    algo = _ALGORITHMS[algorithm]
    B = L.shape[0]
    words = np.zeros((B, g.n), dtype=np.uint8)
    iters = np.zeros(B, dtype=np.int64)
    conv = np.zeros(B, dtype=np.bool_)
    if get_backend() == "numba":
        _batch_nb(
            g.chk_ptr, g.edge_var, g.var_ptr, g.var_edge, L, int(max_iter), algo,
            float(attenuation), float(clamp), words, iters, conv,
        )
    else:
        _batch_np(g, L, int(max_iter), algo, float(attenuation), float(clamp), words, iters, conv)
    return words, conv, iters


def _decode(H, llr, max_iter, algorithm, attenuation, clamp) -> DecodeOutcome:
    g = _graph(H)
    x = np.asarray(llr, dtype=np.float64).ravel()
    if x.size != g.n:
        raise LengthMismatchError(f"llr length {x.size} != n = {g.n}")
    words, conv, iters = decode_batch(g, x[None, :], max_iter, algorithm, attenuation, clamp)
    return DecodeOutcome(words[0], bool(conv[0]), int(iters[0]))


def decode_msa(H, llr, max_iter: int = 50, attenuation: float = 1.0, clamp: float = 30.0) -> DecodeOutcome:
    """Min-sum decoding; ``attenuation`` < 1 gives the normalized variant."""
    return _decode(H, llr, max_iter, "msa", attenuation, clamp)


def decode_spa(H, llr, max_iter: int = 50, clamp: float = 30.0) -> DecodeOutcome:
    """Sum-product decoding with the tanh-rule check update."""
    return _decode(H, llr, max_iter, "spa", 1.0, clamp)
