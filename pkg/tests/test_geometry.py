"""Certification of partial geometries by the three independent routes."""

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import H3_LINES, H3_PRINTED, cyclic_matrix, prime_matrix
from qcpag import errors
from qcpag.base import BaseMatrix, Origin, build_prime_base, mask, MaskingMatrix
from qcpag.dispersion import QcBinaryMatrix, disperse
from qcpag.geometry import (
    BundleKind,
    Certification,
    extract_subgeometry,
    geometry_params,
    intersecting_bundle,
    parallel_bundles,
    protograph,
    rc_constraint_check,
    tanner_dot,
    verify_definition,
    verify_theorem1,
    verify_theorem2,
)
from qcpag.spectral import point_adjacency

QUAD = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]], dtype=np.uint8)


def gq22():
    """GQ(2,2): points are 2-subsets of six symbols, lines are perfect matchings."""
    pts = list(itertools.combinations(range(6), 2))
    idx = {p: i for i, p in enumerate(pts)}
    lines = set()
    for a, b in pts:
        rest = [x for x in range(6) if x not in (a, b)]
        for c, d in itertools.combinations(rest, 2):
            e, f = [x for x in rest if x not in (c, d)]
            lines.add(frozenset([(a, b), (c, d), (e, f)]))
    H = np.zeros((len(lines), 15), dtype=np.uint8)
    for i, L in enumerate(sorted(lines, key=sorted)):
        for p in L:
            H[i, idx[p]] = 1
    return H


def definition_oracle(D):
    """Axioms 1-4 by plain Python loops; returns (gamma, rho, delta) or None."""
    m, n = D.shape
    lines = [set(np.flatnonzero(D[i])) for i in range(m)]
    gam = {int(D[:, j].sum()) for j in range(n)}
    rho = {len(L) for L in lines}
    if len(gam) != 1 or len(rho) != 1:
        return None
    for a, b in itertools.combinations(lines, 2):
        if len(a & b) > 1:
            return None
    deltas = set()
    for L in lines:
        for v in range(n):
            if v in L:
                continue
            deltas.add(sum(1 for M in lines if v in M and M & L))
    if len(deltas) != 1:
        return None
    return gam.pop(), rho.pop(), deltas.pop()


@pytest.mark.parametrize("g,r,d,n,m", [(3, 3, 2, 9, 9), (5, 5, 4, 25, 25), (2, 2, 1, 4, 4), (3, 3, 1, 15, 15), (6, 127, 5, 16129, 762)])
def test_geometry_params(g, r, d, n, m):
    assert geometry_params(g, r, d) == (n, m)


def test_geometry_params_non_integral():
    with pytest.raises(errors.NonIntegralError):
        geometry_params(3, 4, 5)


def test_rc_check_routes_agree():
    assert rc_constraint_check(H3_PRINTED)
    assert rc_constraint_check(prime_matrix(5))
    assert rc_constraint_check(cyclic_matrix(127))
    D = H3_PRINTED.copy()
    D[0, 1] = 1  # row 0 now also contains column 1
    res = rc_constraint_check(D)
    assert not res and res.rows is not None
    i, j = res.rows
    assert np.count_nonzero(D[i] & D[j]) >= 2
    assert D[i, res.cols[0]] and D[j, res.cols[0]] and D[i, res.cols[1]] and D[j, res.cols[1]]


@settings(max_examples=60)
@given(st.integers(2, 7), st.integers(2, 5), st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_rc_qc_route_matches_dense(t, k, r, seed):
    rng = np.random.default_rng(seed)
    H = QcBinaryMatrix(rng.integers(-1, t, size=(k, r)), t)
    fast = rc_constraint_check(H)
    slow = rc_constraint_check(H.to_csr())
    assert bool(fast) == bool(slow)
    if not fast:
        D = H.to_dense()
        i, j = fast.rows
        assert np.count_nonzero(D[i] & D[j]) >= 2


def test_example1_lines_and_bundles(h3):
    G = verify_definition(h3)
    assert G.params == (3, 3, 2) and G.certification is Certification.DEFINITION
    assert G.lines() == H3_LINES
    assert intersecting_bundle(G, 0).lines == (0, 3, 6)
    assert intersecting_bundle(G, 4).lines == (1, 3, 8)
    assert intersecting_bundle(G, 4).kind is BundleKind.INTERSECTING
    with pytest.raises(errors.IndexOutOfRangeError):
        intersecting_bundle(G, 9)
    with pytest.raises(errors.NotBlockCertifiedError):
        parallel_bundles(G)
    T = verify_theorem1(h3)
    assert [b.lines for b in parallel_bundles(T)] == [(0, 1, 2), (3, 4, 5), (6, 7, 8)]


@pytest.mark.parametrize("build", [prime_matrix, cyclic_matrix], ids=["prime", "cyclic"])
@pytest.mark.parametrize("p", [3, 5, 7])
def test_three_routes_agree(build, p):
    H = build(p)
    a = verify_theorem1(H)
    b = verify_theorem2(H, mode="exhaustive")
    c = verify_definition(H)
    assert a.params == b.params == c.params == (p, p, p - 1)
    assert definition_oracle(H.to_dense()) == (p, p, p - 1)
    assert b.detail["pairs_checked"] == b.detail["pairs_total"] == p * (p - 1)


def test_quadrilateral_and_gq():
    assert verify_definition(QUAD).params == (2, 2, 1)
    G = verify_definition(gq22())
    assert G.params == (3, 3, 1) and G.is_gq and not G.is_net
    assert definition_oracle(gq22()) == (3, 3, 1)


def test_point_adjacency_counts():
    """Point graph degree gamma (rho - 1); lambda and mu of the strongly regular graph."""
    for D, (g, r, d) in [(H3_PRINTED, (3, 3, 2)), (prime_matrix(5).to_dense(), (5, 5, 4)), (gq22(), (3, 3, 1)), (QUAD, (2, 2, 1))]:
        A = point_adjacency(D).toarray()
        assert (A.sum(axis=1) == g * (r - 1)).all()
        A2 = A @ A
        adj = A == 1
        off = ~adj & ~np.eye(len(A), dtype=bool)
        assert set(A2[adj]) == {g * d + r - g - d - 1}
        if off.any():
            assert set(A2[off]) == {g * d}


def test_theorem1_errors(h3):
    with pytest.raises(errors.WrongShapeError):
        verify_theorem1(QcBinaryMatrix(prime_matrix(5).shifts[:3], 5))  # block order 5, 3 block rows
    with pytest.raises(errors.ContainsZeroBlockError):
        verify_theorem1(disperse(mask(build_prime_base(3), MaskingMatrix(np.array([[1, 1, 0], [1, 1, 1], [1, 1, 1]])))))
    rep = QcBinaryMatrix(np.array([[0, 0, 1], [0, 0, 2], [0, 0, 0]]), 3)  # repeated block column
    with pytest.raises(errors.RcViolationError):
        verify_theorem1(rep)
    with pytest.raises(errors.WrongShapeError):
        verify_theorem1(h3.to_csr())


def test_theorem2_errors(h3):
    with pytest.raises(errors.TwosCountMismatchError) as ei:
        verify_theorem2(h3, delta=1, mode="exhaustive")
    assert ei.value.expected == 1 and ei.value.found == 2
    with pytest.raises(errors.ContainsZeroBlockError):
        verify_theorem2(QcBinaryMatrix(np.array([[0, -1], [0, 1]]), 2))
    rep = QcBinaryMatrix(np.array([[0, 0, 1], [0, 0, 2], [0, 0, 0]]), 3)
    with pytest.raises((errors.EntryOutOfRangeError, errors.TwosCountMismatchError)):
        verify_theorem2(rep, mode="exhaustive")


def test_theorem2_fast_mode_large():
    H = cyclic_matrix(127)
    G = verify_theorem2(H, delta=126, samples=16)
    assert G.params == (127, 127, 126)
    assert G.detail["pairs_checked"] == 16


def test_theorem2_submatrix_hc6():
    from qcpag.base import build_cyclic_base, select_submatrix

    H = disperse(select_submatrix(build_cyclic_base(128, 127), range(1, 7), range(127)))
    assert rc_constraint_check(H)
    assert verify_theorem2(H, samples=16).params == (6, 127, 5)


def test_definition_errors():
    with pytest.raises(errors.AxiomViolationError) as ei:
        verify_definition(H3_PRINTED[1:])
    assert ei.value.axiom == 2
    D = np.zeros((2, 4), np.uint8)
    D[0, :3] = D[1, 1:] = 1
    with pytest.raises(errors.AxiomViolationError):
        verify_definition(D)
    with pytest.raises(errors.TooLargeError):
        verify_definition(cyclic_matrix(127), max_points=100)


def test_bundles_partition_points():
    G = verify_theorem1(prime_matrix(5))
    bundles = parallel_bundles(G)
    assert len(bundles) == 5
    A = G.csr().toarray()
    for b in bundles:
        assert len(b.lines) == 5
        assert (A[list(b.lines)].sum(axis=0) == 1).all()
    for v in range(25):
        lines = intersecting_bundle(G, v).lines
        assert len({L // 5 for L in lines}) == 5  # one line per parallel bundle


def test_quadrilateral_bundles():
    H = QcBinaryMatrix(np.array([[0, 0], [0, 1]]), 2)
    G = verify_theorem1(H)
    assert G.params == (2, 2, 1)
    assert [len(b.lines) for b in parallel_bundles(G)] == [2, 2]


def test_extract_subgeometry():
    G = verify_theorem1(prime_matrix(5))
    S = extract_subgeometry(G, [0])
    assert S.params == (5, 4, 3) and (S.n_points, S.m_lines) == (20, 25)
    assert verify_definition(S.incidence).params == (5, 4, 3)
    assert extract_subgeometry(G, []) is G
    with pytest.raises(errors.TooManyDroppedError):
        extract_subgeometry(G, [0, 1, 2, 3])
    big = verify_theorem1(prime_matrix(127))
    S = extract_subgeometry(big, range(120))
    assert S.params == (127, 7, 6)


def test_protograph():
    P = protograph(build_prime_base(3))
    by_vn = {j: sorted((cn, lab) for vn, cn, lab in P.edges if vn == j) for j in range(3)}
    assert by_vn == {0: [(0, 0), (1, 0), (2, 0)], 1: [(0, 0), (1, 1), (2, 2)], 2: [(0, 0), (1, 2), (2, 1)]}
    assert np.array_equal(P.lift().to_dense(), H3_PRINTED)
    assert "Omega0" in P.to_dot()
    empty = protograph(BaseMatrix(np.full((2, 2), -1), 3, Origin.MASKED))
    assert empty.edges == ()


def test_protograph_example4(ex4):
    P = protograph(ex4.to_base_matrix())
    assert len(P.edges) == 24
    assert np.array_equal(P.lift().shifts, ex4.shifts)


def test_descriptor_serialisation(h3):
    G = verify_theorem1(h3, source="prime3")
    d = json.loads(G.to_json())
    assert d["gamma"] == 3 and d["certification"] == "Theorem1" and d["matrix"]["block_order"] == 3
    assert tanner_dot(H3_PRINTED).count("--") == 27
