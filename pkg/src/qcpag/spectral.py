"""Closed-form spectra of partial-geometry graphs, numeric checks and expansion bounds.

``A1 = H^T H - gamma I`` is the point graph, a strongly regular graph with
three eigenvalues.  ``A = [[0, H^T], [H, 0]]`` is the Tanner graph; its
eigenvalues are the signed square roots of those of ``H^T H`` plus zeros.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .binary import as_csr
from .errors import (
    AlphaOutOfRangeError,
    NonIntegralMultiplicityError,
    NotBiregularError,
    NotRcConstrainedError,
    SpectrumMismatchError,
    TooLargeError,
)
from .geometry import geometry_params
from .graph import format_table

EIG_TOL = 1e-9
RAMANUJAN_TOL = 1e-12
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class Eigenvalue:
    """Closed-form eigenvalue; ``label`` is its exact form, e.g. ``-sqrt(3)``."""

    value: float
    multiplicity: int
    label: str

    def to_dict(self) -> dict:
        return {"value": self.value, "multiplicity": self.multiplicity, "exact": self.label}


@dataclass(frozen=True)
class SpectrumReport:
    matrix: str  # "A1" or "A"
    params: tuple[int, int, int]
    dimension: int
    eigenvalues: tuple[Eigenvalue, ...]
    mu_max: float
    mu1: float

    def expanded(self) -> np.ndarray:
        """Closed-form multiset as a sorted array."""
        return np.sort(np.repeat([e.value for e in self.eigenvalues], [e.multiplicity for e in self.eigenvalues]))

    def trace(self) -> float:
        return float(sum(e.value * e.multiplicity for e in self.eigenvalues))

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix,
            "params": list(self.params),
            "dimension": self.dimension,
            "eigenvalues": [e.to_dict() for e in self.eigenvalues],
            "mu_max": self.mu_max,
            "mu1": self.mu1,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_table(self) -> str:
        rows = [("eigenvalue", "exact", "multiplicity")]
        rows += [(f"{e.value:.12g}", e.label, str(e.multiplicity)) for e in self.eigenvalues]
        return f"{self.matrix} of PaG{self.params}, dimension {self.dimension}\n" + format_table(rows)


def _srg_multiplicities(gamma: int, rho: int, delta: int) -> tuple[int, int]:
    den = delta * (gamma + rho - 1 - delta)
    m2 = Fraction(gamma * rho * (gamma - 1) * (rho - 1), den)
    m3 = Fraction((rho - 1) * (rho - delta) * ((gamma - 1) * (rho - 1) + delta), den)
    if m2.denominator != 1 or m3.denominator != 1 or m2 < 0 or m3 < 0:
        raise NonIntegralMultiplicityError(f"PaG({gamma}, {rho}, {delta}) has multiplicities {m2}, {m3}")
    return int(m2), int(m3)


def srg_spectrum(gamma: int, rho: int, delta: int) -> SpectrumReport:
    """Eigenvalues of the point graph ``A1``."""
    n, _ = geometry_params(gamma, rho, delta)
    m2, m3 = _srg_multiplicities(gamma, rho, delta)
    if 1 + m2 + m3 != n:
        raise NonIntegralMultiplicityError(f"multiplicities sum to {1 + m2 + m3}, expected {n}")
    vals = [((rho - 1) * gamma, 1), (rho - 1 - delta, m2), (-gamma, m3)]
    eig = tuple(Eigenvalue(float(v), k, str(v)) for v, k in vals if k)
    # mu values always refer to the bipartite adjacency
    mu_max, mu1 = math.sqrt(gamma * rho), math.sqrt(gamma + rho - 1 - delta)
    return SpectrumReport("A1", (gamma, rho, delta), n, eig, mu_max, mu1)


def tanner_spectrum(gamma: int, rho: int, delta: int) -> SpectrumReport:
    """Eigenvalues of the bipartite adjacency ``A``: +-sqrt(gamma rho), +-sqrt(gamma + rho - 1 - delta), 0."""
    n, m = geometry_params(gamma, rho, delta)
    m2, _ = _srg_multiplicities(gamma, rho, delta)
    top = gamma * rho
    mid = gamma + rho - 1 - delta
    zeros = n + m - 2 * (1 + m2)
    if zeros < 0:
        raise NonIntegralMultiplicityError(f"rank of H^T H exceeds the number of lines for PaG({gamma}, {rho}, {delta})")
    eig = [
        Eigenvalue(math.sqrt(top), 1, f"sqrt({top})"),
        Eigenvalue(math.sqrt(mid), m2, f"sqrt({mid})"),
        Eigenvalue(0.0, zeros, "0"),
        Eigenvalue(-math.sqrt(mid), m2, f"-sqrt({mid})"),
        Eigenvalue(-math.sqrt(top), 1, f"-sqrt({top})"),
    ]
    eig = tuple(e for e in eig if e.multiplicity)
    return SpectrumReport("A", (gamma, rho, delta), n + m, eig, math.sqrt(top), math.sqrt(mid))


def point_adjacency(H, gamma: int | None = None) -> sp.csr_matrix:
    """``H^T H - gamma I``; a 0/1 matrix with zero diagonal for RC-constrained ``H``."""
    A = as_csr(H).astype(np.int64)
    colw = np.asarray(A.sum(axis=0)).ravel()
    if gamma is None:
        gamma = int(colw[0]) if colw.size else 0
    if colw.size and not (colw == gamma).all():
        j = int(np.flatnonzero(colw != gamma)[0])
        raise NotBiregularError(f"column {j} has weight {int(colw[j])}, expected {gamma}")
    P = (A.T @ A).tocsr()
    P = (P - gamma * sp.identity(P.shape[0], dtype=np.int64, format="csr")).tocsr()
    P.eliminate_zeros()
    if P.nnz and P.data.max() > 1:
        coo = P.tocoo()
        k = int(np.flatnonzero(coo.data > 1)[0])
        raise NotRcConstrainedError(f"columns {int(coo.row[k])} and {int(coo.col[k])} share {int(coo.data[k])} rows")
    P.sort_indices()
    return P


def trace_check(gamma: int, rho: int, delta: int) -> tuple[bool, bool]:
    """``sum(lambda) == 0`` and ``sum(lambda**2) == n gamma (rho - 1)`` for the closed-form A1 spectrum."""
    rep = srg_spectrum(gamma, rho, delta)
    n = rep.dimension
    s1 = sum(int(e.label) * e.multiplicity for e in rep.eigenvalues)
    s2 = sum(int(e.label) ** 2 * e.multiplicity for e in rep.eigenvalues)
    return s1 == 0, s2 == n * gamma * (rho - 1)


@dataclass(frozen=True)
class ResidualReport:
    a1_residual: float
    tanner_residual: float
    a1_clusters: dict
    tanner_clusters: dict
    tolerance: float

    @property
    def ok(self) -> bool:
        return max(self.a1_residual, self.tanner_residual) < self.tolerance

    def to_dict(self) -> dict:
        return {
            "a1_residual": self.a1_residual,
            "tanner_residual": self.tanner_residual,
            "a1_clusters": self.a1_clusters,
            "tanner_clusters": self.tanner_clusters,
            "tolerance": self.tolerance,
        }


def _clusters(numeric: np.ndarray, rep: SpectrumReport, tol: float) -> tuple[dict, bool]:
    out = {}
    ok = True
    for e in rep.eigenvalues:
        count = int(np.count_nonzero(np.abs(numeric - e.value) < tol))
        out[e.label] = count
        ok &= count == e.multiplicity
    return out, ok


def numeric_spectrum_check(H, gamma: int, rho: int, delta: int, tol: float = EIG_TOL) -> ResidualReport:
    """Dense eigensolve of ``A1`` and ``A`` compared with the closed forms."""
    M = as_csr(H)
    m, n = M.shape
    if n + m > DENSE_LIMIT:
        raise TooLargeError(f"n + m = {n + m} exceeds the dense eigensolve limit {DENSE_LIMIT}")
    a1 = srg_spectrum(gamma, rho, delta)
    ta = tanner_spectrum(gamma, rho, delta)
    if a1.dimension != n or ta.dimension != n + m:
        raise SpectrumMismatchError(f"matrix is {m}x{n}, PaG{(gamma, rho, delta)} needs {ta.dimension - n}x{n}")
    num_a1 = scipy.linalg.eigvalsh(point_adjacency(M, gamma).toarray().astype(float))
    D = M.toarray().astype(float)
    full = np.zeros((n + m, n + m))
    full[:n, n:] = D.T
    full[n:, :n] = D
    num_a = scipy.linalg.eigvalsh(full)
    r1 = float(np.max(np.abs(np.sort(num_a1) - a1.expanded())))
    r2 = float(np.max(np.abs(np.sort(num_a) - ta.expanded())))
    c1, ok1 = _clusters(num_a1, a1, tol)
    c2, ok2 = _clusters(num_a, ta, tol)
    report = ResidualReport(r1, r2, c1, c2, tol)
    if not (report.ok and ok1 and ok2):
        raise SpectrumMismatchError(f"residuals {r1:.3g} / {r2:.3g}, clusters {c1} / {c2}")
    return report


def expansion_lower_bound(c: float, d: float, mu1: float, alpha: float) -> float:
    """Lower bound ``c**2 / (alpha c d + mu1**2 (1 - alpha))`` on the expansion coefficient."""
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRangeError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    if c < 1 or d < 1 or mu1 < 0:
        raise ValueError("need c, d >= 1 and mu1 >= 0")
    return c * c / (alpha * c * d + mu1 * mu1 * (1.0 - alpha))


def is_ramanujan_biregular(c: int, d: int, mu1: float, tol: float = RAMANUJAN_TOL) -> bool:
    if c < 2 or d < 2:
        raise ValueError("Ramanujan test needs c, d >= 2")
    return mu1 <= math.sqrt(c - 1) + math.sqrt(d - 1) + tol


def eigen_ratio(gamma: int, rho: int, delta: int) -> Fraction:
    """``mu1**2 / mu_max**2 = (gamma + rho - delta - 1) / (gamma rho)``, exactly."""
    return Fraction(gamma + rho - delta - 1, gamma * rho)
