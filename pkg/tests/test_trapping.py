import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import prime_matrix
from test_geometry import gq22
from qcpag import errors
from qcpag.geometry import verify_definition, verify_theorem1
from qcpag.trapping import (
    Configuration,
    classify_configuration,
    general_bound,
    induced_profile,
    reports_to_csv,
    search_trapping_sets,
    theorem3_bound,
    theorem3_equality_value,
    theorem4_bound,
    theorem4_bound_max,
)

G3 = verify_theorem1(prime_matrix(3))
G5 = verify_theorem1(prime_matrix(5))


def tau_oracle(D, pts):
    """Odd-degree checks of the induced subgraph, by counting rows directly."""
    deg = D[:, list(pts)].sum(axis=1)
    return int(np.count_nonzero(deg % 2)), {int(i): int((deg == i).sum()) for i in set(deg.tolist()) if i}


def test_colinear_fixture():
    r = induced_profile(G3, {0, 3, 6})
    assert (r.kappa, r.tau, r.profile) == (3, 7, {1: 6, 3: 1})
    assert theorem3_bound(3, 3, r.profile) == 7
    assert theorem4_bound(G3, {0, 3, 6}, (0, 1, 2)) == 7
    assert r.theorem4 == 7 and r.theorem4_ok
    c = classify_configuration(G3, [0, 3, 6])
    assert c.tag is Configuration.COLINEAR and c.agrees and c.claimed_tau == 7


def test_clique_fixture():
    r = induced_profile(G3, {0, 4, 6})
    assert (r.tau, r.profile) == (3, {1: 3, 2: 3})
    assert general_bound(3, 3) == 3 and theorem3_bound(3, 3, r.profile) == 3
    assert theorem4_bound(G3, {0, 4, 6}, (0, 1, 2)) == 3
    c = classify_configuration(G3, [0, 4, 6])
    assert c.tag is Configuration.CLIQUE
    assert c.agrees is False  # the stated m_1 = (gamma - kappa) kappa = 0 disagrees with m_1 = 3
    assert any("m_1" in note for note in c.notes)


def test_single_point():
    for v in range(9):
        r = induced_profile(G3, [v])
        assert (r.kappa, r.tau, r.profile) == (1, 3, {1: 3})
        assert theorem4_bound_max(G3, [v]) == 3
    c = classify_configuration(G3, [0])
    assert c.tag is Configuration.PARTIAL_OVOID and c.agrees


def test_partial_ovoid_and_other():
    # in a net any two points either share a line or meet no common line
    D = G3.csr().toarray()
    for pts in itertools.combinations(range(9), 2):
        c = classify_configuration(G3, pts)
        shared = (D[:, list(pts)].sum(axis=1) == 2).any()
        assert c.tag is (Configuration.COLINEAR if shared else Configuration.PARTIAL_OVOID)
    G = verify_definition(gq22())
    found_ovoid = found_other = False
    for pts in itertools.combinations(range(15), 3):
        c = classify_configuration(G, pts)
        if c.tag is Configuration.PARTIAL_OVOID:
            found_ovoid = True
            assert c.computed.tau == 3 * 3
        if c.tag is Configuration.OTHER:
            found_other = True
    assert found_ovoid and found_other


def test_bound_examples():
    assert general_bound(3, 1) == 3
    assert general_bound(127, 6) == 732
    assert theorem3_bound(5, 1, {1: 5}) == 5
    with pytest.raises(errors.InconsistentProfileError):
        theorem3_bound(3, 2, {1: 3})
    with pytest.raises(errors.InconsistentProfileError):
        theorem3_equality_value(3, 2, {1: 3})


def test_theorem4_errors():
    with pytest.raises(errors.NotANetError):
        theorem4_bound(verify_definition(gq22()), [0], (0, 1, 2))
    with pytest.raises(errors.NotAParallelBundleError):
        theorem4_bound(G3, [0], (0, 3, 6))


def test_profile_errors():
    with pytest.raises(errors.EmptySetError):
        induced_profile(G3, [])
    with pytest.raises(errors.IndexOutOfRangeError):
        induced_profile(G3, [9])


@settings(max_examples=200)
@given(st.sets(st.integers(0, 24), min_size=1, max_size=8))
def test_profile_invariants(pts):
    r = induced_profile(G5, pts)
    D = G5.csr().toarray()
    tau, prof = tau_oracle(D, pts)
    assert r.tau == tau and r.profile == prof
    assert sum(i * m for i, m in r.profile.items()) == r.kappa * 5
    assert sum(m for i, m in r.profile.items() if i % 2) == r.tau
    if r.small:
        assert r.kappa <= math.sqrt(25) and r.tau <= 4 * r.kappa
    assert not r.violated
    for b in range(5):
        t4 = theorem4_bound(G5, pts, range(5 * b, 5 * b + 5))
        assert r.tau >= t4
        kl = D[5 * b:5 * b + 5][:, sorted(pts)].sum(axis=1)
        if r.kappa < 5 and kl.max() >= 3:
            assert t4 >= general_bound(5, r.kappa)


@settings(max_examples=100)
@given(st.integers(2, 5), st.data())
def test_colinear_profile_property(kappa, data):
    line = data.draw(st.integers(0, 24))
    pts = data.draw(st.permutations(G5.lines()[line]))[:kappa]
    r = induced_profile(G5, pts)
    assert r.profile == {kappa: 1, 1: kappa * 4}
    c = classify_configuration(G5, pts)
    assert c.tag is Configuration.COLINEAR
    if kappa % 2:
        assert c.agrees and r.tau == 4 * kappa + 1


def test_exhaustive_search_small():
    s = search_trapping_sets(G3, kappa_max=3, tau_max=9)
    assert s.exhaustive and s.examined == {1: 9, 2: 36, 3: 84} and not s.violations
    assert len(s) == 129
    assert all(r.general_ok is not False and r.theorem3_ok is not False for r in s)
    s1 = search_trapping_sets(G3, kappa_max=1, tau_max=9)
    assert len(s1) == 9 and {(r.kappa, r.tau) for r in s1} == {(1, 3)}
    csv = reports_to_csv(s1)
    assert csv.splitlines()[0].startswith("kappa,tau,points,m_1")
    assert json.loads(s1.to_json())["exhaustive"] is True


def test_search_matches_per_set_reports():
    s = search_trapping_sets(G5, kappa_max=2, tau_max=100)
    for r in s.reports[:60]:
        assert r == induced_profile(G5, r.points)


def test_search_p5_no_violations():
    s = search_trapping_sets(G5, kappa_max=3, tau_max=12)
    assert sum(s.examined.values()) == 2625 and not s.violations


def test_search_budget_and_sampling():
    G7 = verify_theorem1(prime_matrix(11))
    with pytest.raises(errors.BudgetExceededError):
        search_trapping_sets(G7, 3, 10, mode="exhaustive")
    a = search_trapping_sets(G7, 3, 30, samples=200, seed=3)
    b = search_trapping_sets(G7, 3, 30, samples=200, seed=3)
    assert not a.exhaustive and a.examined == {1: 200, 2: 200, 3: 200}
    assert [r.points for r in a] == [r.points for r in b]
