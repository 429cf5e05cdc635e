"""Trapping sets of partial-geometry codes.

A set ``D`` of variable nodes (points) induces, for every line, the number of
its points lying in ``D``; ``m_i`` counts lines meeting ``D`` in exactly ``i``
points and ``tau`` counts lines meeting it an odd number of times.  Profiles
are always computed from the incidence structure; the closed-form claims for
special configurations are only reported next to them.
"""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import (
    BoundViolationError,
    BudgetExceededError,
    EmptySetError,
    IndexOutOfRangeError,
    InconsistentProfileError,
    NotANetError,
    NotAParallelBundleError,
)
from .geometry import GeometryDescriptor, parallel_bundles


def general_bound(gamma: int, kappa: int) -> int:
    """``tau >= (gamma + 1 - kappa) kappa``, stated for ``kappa < gamma`` and girth >= 6."""
    return (gamma + 1 - kappa) * kappa


def _profile_sums(profile: dict[int, int], top_odd: int | None = None, top_even: int | None = None) -> int:
    total = 0
    for i, mi in profile.items():
        if i % 2:
            if top_odd is None or i <= top_odd:
                total += (i - 1) ** 2 * mi
        elif top_even is None or i <= top_even:
            total += i * (i - 2) * mi
    return total


def theorem3_bound(gamma: int, kappa: int, profile: dict[int, int]) -> int:
    """Profile-refined bound ``(gamma+1-kappa) kappa + sum_odd (i-1)^2 m_i + sum_even i(i-2) m_i``."""
    if sum(i * mi for i, mi in profile.items()) != kappa * gamma:
        raise InconsistentProfileError(f"sum of i*m_i must equal kappa*gamma = {kappa * gamma}")
    return general_bound(gamma, kappa) + _profile_sums(profile)


def theorem3_equality_value(gamma: int, kappa: int, profile: dict[int, int]) -> int:
    """The same expression with the sums truncated at ``2 floor((kappa+1)/2) - 1`` and ``2 floor(kappa/2)``.

    Stated to be attained when ``delta == rho``.
    """
    if sum(i * mi for i, mi in profile.items()) != kappa * gamma:
        raise InconsistentProfileError(f"sum of i*m_i must equal kappa*gamma = {kappa * gamma}")
    return general_bound(gamma, kappa) + _profile_sums(profile, 2 * ((kappa + 1) // 2) - 1, 2 * (kappa // 2))


def _bundle_counts(G: GeometryDescriptor, points, bundle) -> np.ndarray:
    A = G.csr()
    lines = [int(x) for x in bundle]
    cover = np.bincount(A[lines].indices, minlength=G.n_points) if lines else np.zeros(G.n_points, int)
    if not lines or cover.min() != 1 or cover.max() != 1:
        raise NotAParallelBundleError("lines must be pairwise disjoint and cover every point")
    mask = np.zeros(G.n_points, dtype=bool)
    mask[list(points)] = True
    sub = A[lines][:, mask]
    return np.asarray(sub.sum(axis=1)).ravel()


def theorem4_bound(G: GeometryDescriptor, delta_set, bundle) -> int:
    """Net bound ``(gamma-1) kappa - kappa^2 + sum kappa_l^2 + #{l : kappa_l odd}`` for one parallel bundle."""
    if not G.is_net:
        raise NotANetError(f"PaG{G.params} is not a net (delta != gamma - 1)")
    points = _check_points(G, delta_set)
    k = _bundle_counts(G, points, bundle)
    kappa = len(points)
    return int((G.gamma - 1) * kappa - kappa * kappa + int((k * k).sum()) + int(np.count_nonzero(k % 2)))


def theorem4_bound_max(G: GeometryDescriptor, delta_set) -> int:
    """Largest Theorem-4 value over the parallel bundles of a block-certified net."""
    return max(theorem4_bound(G, delta_set, b.lines) for b in parallel_bundles(G))


@dataclass(frozen=True)
class TrappingReport:
    points: tuple[int, ...]
    kappa: int
    tau: int
    profile: dict
    elementary: bool
    small: bool
    general: int
    general_ok: bool | None  # None when kappa >= gamma (bound not claimed)
    theorem3: int
    theorem3_ok: bool | None  # None when kappa > gamma
    theorem4: int | None = None
    theorem4_ok: bool | None = None

    @property
    def violated(self) -> bool:
        return False in (self.general_ok, self.theorem3_ok, self.theorem4_ok)

    def to_dict(self) -> dict:
        return {
            "points": list(self.points),
            "kappa": self.kappa,
            "tau": self.tau,
            "profile": {str(i): m for i, m in sorted(self.profile.items())},
            "elementary": self.elementary,
            "small": self.small,
            "general": self.general,
            "general_ok": self.general_ok,
            "theorem3": self.theorem3,
            "theorem3_ok": self.theorem3_ok,
            "theorem4": self.theorem4,
            "theorem4_ok": self.theorem4_ok,
        }


def _check_points(G: GeometryDescriptor, delta_set) -> tuple[int, ...]:
    pts = tuple(sorted(set(int(v) for v in delta_set)))
    if not pts:
        raise EmptySetError("the point set is empty")
    if pts[0] < 0 or pts[-1] >= G.n_points:
        raise IndexOutOfRangeError(f"point indices must lie in [0, {G.n_points})")
    return pts


def _make_report(G, pts, counts_row, t4=None) -> TrappingReport:
    kappa = len(pts)
    gamma = G.gamma
    hit = counts_row[counts_row > 0]
    profile = {int(i): int(c) for i, c in zip(*np.unique(hit, return_counts=True))}
    tau = int(np.count_nonzero(hit % 2))
    gen = general_bound(gamma, kappa)
    th3 = theorem3_bound(gamma, kappa, profile)
    return TrappingReport(
        points=pts,
        kappa=kappa,
        tau=tau,
        profile=profile,
        elementary=bool(hit.size) and int(hit.max()) <= 2,
        small=kappa <= math.sqrt(G.n_points) and tau <= 4 * kappa,
        general=gen,
        general_ok=(tau >= gen) if kappa < gamma else None,
        theorem3=th3,
        theorem3_ok=(tau >= th3) if kappa <= gamma else None,
        theorem4=t4,
        theorem4_ok=None if t4 is None else tau >= t4,
    )


def induced_profile(G: GeometryDescriptor, delta_set) -> TrappingReport:
    pts = _check_points(G, delta_set)
    A = G.csr()
    mask = np.zeros(G.n_points, dtype=bool)
    mask[list(pts)] = True
    counts = np.asarray(A[:, mask].sum(axis=1)).ravel()
    t4 = theorem4_bound_max(G, pts) if G.is_net and G.block_certified else None
    return _make_report(G, pts, counts, t4)


class Configuration(str, enum.Enum):
    COLINEAR = "Colinear"
    CLIQUE = "Clique"
    PARTIAL_OVOID = "PartialOvoid"
    OTHER = "Other"


@dataclass(frozen=True)
class ConfigurationReport:
    tag: Configuration
    computed: TrappingReport
    claimed_profile: dict | None
    claimed_tau: int | None
    agrees: bool | None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "tag": self.tag.value,
            "computed": self.computed.to_dict(),
            "claimed_profile": None if self.claimed_profile is None else {str(k): v for k, v in self.claimed_profile.items()},
            "claimed_tau": self.claimed_tau,
            "agrees": self.agrees,
            "notes": list(self.notes),
        }


def classify_configuration(G: GeometryDescriptor, delta_set) -> ConfigurationReport:
    """Tag a point set and compare its computed profile with the closed-form claim for that shape.

    A single point is a (vacuous) partial ovoid.  For two or more points the
    tests run in the order colinear, clique, partial ovoid.
    """
    pts = _check_points(G, delta_set)
    rep = induced_profile(G, pts)
    kappa, gamma, rho = rep.kappa, G.gamma, G.rho
    A = G.csr()
    mask = np.zeros(G.n_points, dtype=bool)
    mask[list(pts)] = True
    per_line = np.asarray(A[:, mask].sum(axis=1)).ravel()
    notes: list[str] = []
    if kappa >= 2 and per_line.max() == kappa:
        tag = Configuration.COLINEAR
        claimed = {kappa: 1, 1: kappa * (gamma - 1)}
        claimed_tau = (gamma - 1) * kappa + 1
        if kappa % 2 == 0:
            notes.append("for even kappa the shared line has even degree, so it is not counted in tau")
    elif kappa >= 2 and _pairwise_adjacent(A, pts):
        tag = Configuration.CLIQUE
        claimed = {1: (gamma - kappa) * kappa, 2: comb(kappa, 2)}
        claimed_tau = (gamma - kappa) * kappa
        notes.append(f"direct count gives m_1 = kappa (gamma - kappa + 1) = {kappa * (gamma - kappa + 1)}")
        notes.append(f"claimed tau/kappa = rho - kappa = {rho - kappa}, computed {rep.tau}/{kappa}")
    elif per_line.max() <= 1:
        tag = Configuration.PARTIAL_OVOID
        claimed = {1: kappa * gamma}
        claimed_tau = kappa * gamma
        notes.append(f"computed tau/kappa = gamma = {gamma}; the kappa/tau = 1 + t claim has an undefined t")
        if kappa > 1 + (gamma - 1) * (rho - 1):
            notes.append("set exceeds the maximum partial-ovoid size")
    else:
        return ConfigurationReport(Configuration.OTHER, rep, None, None, None)
    agrees = claimed == rep.profile and claimed_tau == rep.tau
    return ConfigurationReport(tag, rep, claimed, claimed_tau, agrees, tuple(notes))


def _pairwise_adjacent(A, pts) -> bool:
    sub = A[:, list(pts)].astype(np.int32)
    meet = (sub.T @ sub).toarray()
    off = ~np.eye(len(pts), dtype=bool)
    return bool((meet[off] >= 1).all())


# ------------------------------------------------------------------ search

@dataclass
class TrappingSearch:
    reports: list
    examined: dict  # kappa -> number of subsets examined
    violations: list
    exhaustive: bool

    def __iter__(self):
        return iter(self.reports)

    def __len__(self) -> int:
        return len(self.reports)

    def to_json(self, **kw) -> str:
        return json.dumps(
            {
                "exhaustive": self.exhaustive,
                "examined": {str(k): v for k, v in self.examined.items()},
                "violations": [r.to_dict() for r in self.violations],
                "reports": [r.to_dict() for r in self.reports],
            },
            **kw,
        )


def _subsets(n: int, kappa: int, exhaustive: bool, samples: int, rng) -> np.ndarray:
    if exhaustive:
        return np.array(list(itertools.combinations(range(n), kappa)), dtype=np.int64).reshape(-1, kappa)
    out = np.empty((samples, kappa), dtype=np.int64)
    for s in range(samples):
        out[s] = np.sort(rng.choice(n, size=kappa, replace=False))
    return out


def search_trapping_sets(
    G: GeometryDescriptor,
    kappa_max: int,
    tau_max: int,
    mode: str = "auto",
    samples: int = 10_000,
    seed: int = 0,
    max_points: int = 64,
    max_kappa: int = 4,
    strict: bool = True,
    chunk: int = 65_536,
) -> TrappingSearch:
    """Examine every point set of size ``1..kappa_max`` (or a seeded sample) against the bounds.

    Sets with ``tau <= tau_max`` are returned as reports.  Every examined set
    is checked; with ``strict`` any bound violation raises
    :class:`BoundViolationError`.  Exhaustive search is limited to
    ``n <= max_points`` and ``kappa_max <= max_kappa``.
    """
    n = G.n_points
    within = n <= max_points and kappa_max <= max_kappa
    if mode == "exhaustive" and not within:
        raise BudgetExceededError(f"exhaustive search limited to n <= {max_points}, kappa <= {max_kappa}")
    if mode not in ("auto", "exhaustive", "sample"):
        raise ValueError("mode must be 'auto', 'exhaustive' or 'sample'")
    exhaustive = mode == "exhaustive" or (mode == "auto" and within)
    rng = np.random.default_rng(seed)
    inc = G.csr().T.tocsr()  # points x lines
    dense = inc.toarray().astype(np.int16)
    bundles = [np.array(b.lines) for b in parallel_bundles(G)] if G.is_net and G.block_certified else []
    gamma = G.gamma
    reports, violations, examined = [], [], {}
    for kappa in range(1, kappa_max + 1):
        subsets = _subsets(n, kappa, exhaustive, samples, rng)
        examined[kappa] = int(subsets.shape[0])
        for start in range(0, subsets.shape[0], chunk):
            S = subsets[start:start + chunk]
            counts = dense[S].sum(axis=1)  # (k, lines)
            tau = (counts % 2).sum(axis=1)
            extra = np.zeros(S.shape[0], dtype=np.int64)
            for i in range(2, kappa + 1):
                mi = (counts == i).sum(axis=1)
                extra += ((i - 1) ** 2 if i % 2 else i * (i - 2)) * mi
            gen = general_bound(gamma, kappa)
            bad = np.zeros(S.shape[0], dtype=bool)
            if kappa < gamma:
                bad |= tau < gen
            if kappa <= gamma:
                bad |= tau < gen + extra
            t4 = None
            if bundles:
                per = [
                    (gamma - 1) * kappa - kappa**2 + (counts[:, b] ** 2).sum(axis=1) + (counts[:, b] % 2).sum(axis=1)
                    for b in bundles
                ]
                t4 = np.max(per, axis=0)
                bad |= tau < t4
            keep = np.flatnonzero((tau <= tau_max) | bad)
            for k in keep:
                rep = _make_report(G, tuple(int(x) for x in S[k]), counts[k], None if t4 is None else int(t4[k]))
                if bad[k]:
                    violations.append(rep)
                if tau[k] <= tau_max:
                    reports.append(rep)
    if strict and violations:
        raise BoundViolationError(violations)
    return TrappingSearch(reports, examined, violations, exhaustive)


def reports_to_csv(reports) -> str:
    reports = list(reports)
    top = max((max(r.profile, default=0) for r in reports), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["kappa", "tau", "points"] + [f"m_{i}" for i in range(1, top + 1)]
        + ["elementary", "small", "general", "general_ok", "theorem3", "theorem3_ok", "theorem4", "theorem4_ok"]
    )
    for r in reports:
        w.writerow(
            [r.kappa, r.tau, " ".join(map(str, r.points))]
            + [r.profile.get(i, 0) for i in range(1, top + 1)]
            + [r.elementary, r.small, r.general, r.general_ok, r.theorem3, r.theorem3_ok, r.theorem4, r.theorem4_ok]
        )
    return buf.getvalue()
