"""Base matrices of residues modulo ``t`` and their masking.

A base matrix is a ``k x r`` grid whose entries are residues ``0 <= v < t``
or the :data:`MASKED` marker.  Residue ``v`` later disperses to the circulant
permutation matrix with shift ``v`` (residue 0 is the identity), while a
masked entry disperses to the all-zero block, so the two must never be
conflated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    DisconnectedMaskError,
    DoesNotDivideError,
    DuplicateIndexError,
    FormatError,
    IndexOutOfRangeError,
    NotPrimeError,
    QcpagError,
    WrongOriginError,
)

MASKED = -1


class Origin(str, enum.Enum):
    PRIME_FIELD = "PrimeField"
    CYCLIC_SUBGROUP = "CyclicSubgroup"
    SUBMATRIX = "Submatrix"
    MASKED = "Masked"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power_base(q: int) -> int | None:
    """Return ``p`` if ``q = p**e`` for a prime ``p`` and ``e >= 1``, else None."""
    if q < 2:
        return None
    p = 2
    while p * p <= q:
        if q % p == 0:
            break
        p += 1
    else:
        return q  # q itself is prime
    while q % p == 0:
        q //= p
    return p if q == 1 else None


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.int64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BaseMatrix:
    """``k x r`` grid of residues modulo ``modulus`` with optional masked cells.

    Equality compares entries and modulus only; ``origin`` is provenance.
    """

    entries: np.ndarray
    modulus: int
    origin: Origin

    def __post_init__(self) -> None:
        e = _frozen(self.entries)
        if e.ndim != 2:
            raise DimensionMismatchError(f"base matrix must be 2-D, got shape {e.shape}")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "origin", Origin(self.origin))
        t = int(self.modulus)
        if t < 1:
            raise QcpagError(f"modulus must be positive, got {t}")
        object.__setattr__(self, "modulus", t)
        masked = e == MASKED
        live = e[~masked]
        if live.size and (live.min() < 0 or live.max() >= t):
            raise QcpagError(f"residues must lie in [0, {t})")
        if masked.any() and self.origin is not Origin.MASKED:
            raise QcpagError("masked entries are only allowed in a matrix of origin Masked")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def mask_pattern(self) -> np.ndarray:
        """Binary ``k x r`` array, 1 where the entry is a residue."""
        return (self.entries != MASKED).astype(np.uint8)

    @property
    def n_masked(self) -> int:
        return int(np.count_nonzero(self.entries == MASKED))

    def __getitem__(self, ij: tuple[int, int]) -> int | None:
        v = int(self.entries[ij])
        return None if v == MASKED else v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BaseMatrix):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.modulus, self.entries.tobytes(), self.entries.shape))

    def __repr__(self) -> str:
        return f"BaseMatrix({self.rows}x{self.cols}, t={self.modulus}, origin={self.origin.value})"

    def to_text(self) -> str:
        lines = [f"{self.modulus} {self.rows} {self.cols} {self.origin.value}"]
        for row in self.entries:
            lines.append(" ".join("*" if v == MASKED else str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BaseMatrix":
        lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines or len(lines[0]) != 4:
            raise FormatError("base matrix header must be 't k r origin'")
        try:
            t, k, r = (int(x) for x in lines[0][:3])
            origin = Origin(lines[0][3])
        except ValueError as exc:
            raise FormatError(f"bad base matrix header: {lines[0]}") from exc
        body = lines[1:]
        if len(body) != k or any(len(row) != r for row in body):
            raise FormatError(f"expected {k} rows of {r} tokens")
        grid = [[MASKED if tok == "*" else int(tok) for tok in row] for row in body]
        return cls(np.array(grid, dtype=np.int64).reshape(k, r), t, origin)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> "BaseMatrix":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class MaskingMatrix:
    """Binary ``k x r`` grid; a 0 at ``(i, j)`` masks base entry ``(i, j)``."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        z = np.array(self.entries, dtype=np.uint8, copy=True)
        if z.ndim != 2:
            raise DimensionMismatchError("masking matrix must be 2-D")
        if not np.isin(z, (0, 1)).all():
            raise QcpagError("masking matrix entries must be 0 or 1")
        z.setflags(write=False)
        object.__setattr__(self, "entries", z)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def n_zeros(self) -> int:
        return int(self.entries.size - np.count_nonzero(self.entries))

    @classmethod
    def from_text(cls, text: str) -> "MaskingMatrix":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or len({len(r) for r in rows}) != 1:
            raise FormatError("masking matrix must be non-empty rows of equal length")
        return cls(np.array([[int(x) for x in r] for r in rows], dtype=np.uint8))

    @classmethod
    def load(cls, path: str | Path) -> "MaskingMatrix":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        return "\n".join(" ".join(str(int(x)) for x in row) for row in self.entries) + "\n"


def _product_grid(t: int) -> np.ndarray:
    i = np.arange(t, dtype=np.int64)
    return np.outer(i, i) % t


def build_prime_base(p: int) -> BaseMatrix:
    """The ``p x p`` base matrix with entry ``(i, j) = i*j mod p``."""
    if not is_prime(p):
        raise NotPrimeError(f"{p} is not prime")
    return BaseMatrix(_product_grid(p), p, Origin.PRIME_FIELD)


def build_cyclic_base(q: int, t: int) -> BaseMatrix:
    """Exponent grid of ``[beta**(i*j)]`` for ``beta`` of prime order ``t`` in GF(q).

    Only the exponents matter for dispersion, so the result is the ``t x t``
    grid ``i*j mod t``.  ``t`` must be prime and divide ``q - 1``.
    """
    if prime_power_base(q) is None:
        raise QcpagError(f"{q} is not a prime power")
    if not is_prime(t):
        raise NotPrimeError(f"{t} is not prime")
    if (q - 1) % t != 0:
        raise DoesNotDivideError(f"{t} does not divide q - 1 = {q - 1}")
    return BaseMatrix(_product_grid(t), t, Origin.CYCLIC_SUBGROUP)


def _check_indices(ids: Sequence[int], bound: int, what: str) -> np.ndarray:
    ids = np.asarray(list(ids), dtype=np.int64)
    if ids.ndim != 1 or ids.size == 0:
        raise IndexOutOfRangeError(f"{what} index list must be a non-empty sequence")
    if ids.min() < 0 or ids.max() >= bound:
        raise IndexOutOfRangeError(f"{what} index out of range [0, {bound})")
    if np.unique(ids).size != ids.size:
        raise DuplicateIndexError(f"duplicate {what} index")
    return ids


def select_submatrix(B: BaseMatrix, row_ids: Sequence[int], col_ids: Sequence[int]) -> BaseMatrix:
    rows = _check_indices(row_ids, B.rows, "row")
    cols = _check_indices(col_ids, B.cols, "column")
    sub = B.entries[np.ix_(rows, cols)]
    origin = Origin.MASKED if (sub == MASKED).any() else Origin.SUBMATRIX
    return BaseMatrix(sub, B.modulus, origin)


def random_indices(B: BaseMatrix, k: int, r: int, seed: int) -> tuple[list[int], list[int]]:
    """Seeded random choice of ``k`` distinct rows and ``r`` distinct columns (sorted)."""
    if not (1 <= k <= B.rows and 1 <= r <= B.cols):
        raise IndexOutOfRangeError(f"cannot choose {k}x{r} from {B.rows}x{B.cols}")
    rng = np.random.default_rng(seed)
    rows = sorted(int(x) for x in rng.choice(B.rows, size=k, replace=False))
    cols = sorted(int(x) for x in rng.choice(B.cols, size=r, replace=False))
    return rows, cols


def mask(B: BaseMatrix, Z: MaskingMatrix) -> BaseMatrix:
    """Replace entries where ``Z`` is 0 by :data:`MASKED`."""
    if Z.shape != B.shape:
        raise DimensionMismatchError(f"mask shape {Z.shape} != base shape {B.shape}")
    z = Z.entries
    dead_rows = np.flatnonzero(z.sum(axis=1) == 0)
    dead_cols = np.flatnonzero(z.sum(axis=0) == 0)
    if dead_rows.size or dead_cols.size:
        raise DisconnectedMaskError(
            f"masking would disconnect the Tanner graph (zero rows {dead_rows.tolist()}, "
            f"zero columns {dead_cols.tolist()})"
        )
    out = np.where(z == 1, B.entries, MASKED)
    return BaseMatrix(out, B.modulus, Origin.MASKED)


def latin_square_view(B: BaseMatrix) -> np.ndarray:
    """Drop row 0 and column 0 of a full construction; a Latin square on ``1..t-1``."""
    if B.origin not in (Origin.PRIME_FIELD, Origin.CYCLIC_SUBGROUP):
        raise WrongOriginError(f"latin square view needs a full construction, got {B.origin.value}")
    return np.array(B.entries[1:, 1:])


def parse_index_spec(spec: str) -> list[int]:
    """Parse ``"1..6"``, ``"0,3,5"`` or ``"1..3,7"`` (ranges inclusive)."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out
