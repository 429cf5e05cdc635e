import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import H3_PRINTED, prime_matrix
from test_geometry import QUAD, gq22
from qcpag import errors
from qcpag.spectral import (
    eigen_ratio,
    expansion_lower_bound,
    is_ramanujan_biregular,
    numeric_spectrum_check,
    point_adjacency,
    srg_spectrum,
    tanner_spectrum,
    trace_check,
)

FIXTURES = [((3, 3, 2), H3_PRINTED), ((5, 5, 4), prime_matrix(5).to_dense()), ((2, 2, 1), QUAD), ((3, 3, 1), gq22())]


@pytest.mark.parametrize("params,D", FIXTURES, ids=["332", "554", "221", "331"])
def test_numeric_matches_closed_form(params, D):
    rep = numeric_spectrum_check(D, *params)
    assert rep.ok and rep.a1_residual < 1e-9 and rep.tanner_residual < 1e-9
    # independent oracle: eigvalsh of the bipartite adjacency built here
    m, n = D.shape
    A = np.block([[np.zeros((n, n)), D.T], [D, np.zeros((m, m))]]).astype(float)
    assert np.allclose(np.sort(np.linalg.eigvalsh(A)), tanner_spectrum(*params).expanded(), atol=1e-9)


def test_srg_values():
    rep = srg_spectrum(3, 3, 2)
    assert [(e.value, e.multiplicity) for e in rep.eigenvalues] == [(6.0, 1), (0.0, 6), (-3.0, 2)]
    assert rep.mu_max == 3.0 and rep.mu1 == pytest.approx(math.sqrt(3))
    t = tanner_spectrum(2, 2, 1)
    assert t.dimension == 8 and t.trace() == pytest.approx(0.0, abs=1e-12)
    assert json.loads(t.to_json())["matrix"] == "A"
    assert "sqrt(9)" in tanner_spectrum(3, 3, 2).to_table()


@given(st.integers(2, 40))
def test_trace_identities_nets(g):
    assert trace_check(g, g, g - 1) == (True, True)


@pytest.mark.parametrize("params", [(3, 3, 2), (5, 5, 4), (2, 2, 1), (3, 3, 1), (127, 127, 126), (6, 127, 5)])
def test_trace_identities(params):
    assert trace_check(*params) == (True, True)


def test_tanner_trace_against_edge_count():
    # sum of squared eigenvalues of A is twice the number of edges
    for (g, r, d), D in FIXTURES:
        rep = tanner_spectrum(g, r, d)
        s2 = sum(e.value**2 * e.multiplicity for e in rep.eigenvalues)
        assert s2 == pytest.approx(2 * D.sum())


def test_non_integral_multiplicity():
    with pytest.raises(errors.NonIntegralMultiplicityError):
        srg_spectrum(4, 4, 2)  # counts are integral, multiplicities are not


def test_point_adjacency_errors():
    with pytest.raises(errors.NotBiregularError):
        point_adjacency(np.array([[1, 1, 0], [1, 0, 0]], np.uint8))
    with pytest.raises(errors.NotRcConstrainedError):
        point_adjacency(np.ones((2, 2), np.uint8))
    A = point_adjacency(H3_PRINTED)
    assert A.diagonal().sum() == 0 and A.max() == 1


def test_numeric_errors():
    with pytest.raises(errors.SpectrumMismatchError):
        numeric_spectrum_check(H3_PRINTED, 5, 5, 4)
    with pytest.raises(errors.TooLargeError):
        numeric_spectrum_check(prime_matrix(37), 37, 37, 36)


def test_expansion_hand_value():
    assert expansion_lower_bound(3, 3, math.sqrt(3), 1 / 3) == pytest.approx(1.8, abs=1e-12)
    # exact arithmetic oracle
    assert Fraction(9) / (Fraction(1, 3) * 9 + 3 * Fraction(2, 3)) == Fraction(9, 5)
    for a in (0.0, 1.0, -0.1):
        with pytest.raises(errors.AlphaOutOfRangeError):
            expansion_lower_bound(3, 3, 1.0, a)


@given(st.floats(0.01, 0.99), st.integers(2, 20), st.integers(2, 20))
def test_expansion_monotone_in_mu1(alpha, c, d):
    lo = expansion_lower_bound(c, d, 1.0, alpha)
    hi = expansion_lower_bound(c, d, 2.0, alpha)
    assert lo >= hi > 0


@pytest.mark.parametrize("p", [3, 5, 7, 127])
def test_ramanujan_both_classes(p):
    # the prime-field and cyclic-subgroup arrays share the parameters PaG(p, p, p - 1)
    rep = tanner_spectrum(p, p, p - 1)
    assert is_ramanujan_biregular(p, p, rep.mu1)


def test_eigen_ratio():
    assert eigen_ratio(3, 3, 2) == Fraction(1, 3)
    rep = tanner_spectrum(5, 5, 4)
    assert float(eigen_ratio(5, 5, 4)) == pytest.approx(rep.mu1**2 / rep.mu_max**2)
