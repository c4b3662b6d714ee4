import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fthresh.errors import PreconditionError
from fthresh.frobenius import (
    bracket_power,
    ci_check,
    fedder_pair_check,
    frobenius_root,
    in_bracket_m,
    mu_invariant,
    nu_invariant,
)
from fthresh.groebner import IdealHandle, ideal_power
from fthresh.poly import PolyRing, power, power_reduced

from strategies import maximal_polys, polys

R2 = PolyRing(2, 2)
R3 = PolyRing(3, 2)
R5 = PolyRing(5, 2)
R7 = PolyRing(7, 2)


def I(text, ring):
    return IdealHandle.parse(text, ring)


def brute_nu(f, q):
    r = 0
    while not power(f, r + 1).truncate(q).is_zero():
        r += 1
    return r


def test_bracket_power_examples():
    assert bracket_power(I("x, y", R2), 4).equals(I("x^4, y^4", R2))
    assert bracket_power(I("x+y", R3), 3).equals(I("x^3+y^3", R3))
    assert bracket_power(I("1", R3), 9).is_unit()


def test_in_bracket_m_examples():
    for q in (2, 4, 8):
        x, y = R2.gens()
        assert not in_bracket_m(x ** (q - 1) * y ** (q - 1), q)
        assert in_bracket_m(x**q, q)
        assert in_bracket_m(R2.zero(), q)


@pytest.mark.parametrize(
    "f, p, q, nu",
    [("x", 2, 8, 7), ("x*y", 3, 9, 8), ("x^2+y^3", 7, 7, 5), ("x^2+y^3", 7, 49, 40), ("x^2", 2, 8, 3)],
)
def test_nu_examples(f, p, q, nu):
    r = PolyRing(p, 2)
    w = nu_invariant(r.parse(f), q)
    assert w.r == nu
    m = w.surviving_monomial
    assert max(m) <= q - 1
    assert m in power_reduced(r.parse(f), nu, q).terms


def test_nu_rejects_units_and_zero():
    with pytest.raises(PreconditionError):
        nu_invariant(R5.parse("1+x"), 5)
    with pytest.raises(PreconditionError):
        nu_invariant(R5.zero(), 5)


@given(maximal_polys(R3, max_terms=3, max_exp=3), st.sampled_from([3, 9]))
def test_nu_matches_direct_expansion(f, q):
    assert nu_invariant(f, q).r == brute_nu(f, q)


@given(st.lists(maximal_polys(R2, max_terms=2, max_exp=2), min_size=1, max_size=3), st.sampled_from([2, 4]))
def test_nu_of_ideal_matches_powers(gens, q):
    a = IdealHandle(gens, R2)
    r = 0
    while not all(g.truncate(q).is_zero() for g in ideal_power(a, r + 1).generators):
        r += 1
    assert nu_invariant(a, q).r == r


@given(maximal_polys(PolyRing(2, 3), max_terms=3, max_exp=3))
def test_nu_scaling(f):
    p = 2
    for e in (1, 2, 3):
        assert nu_invariant(f, p ** (e + 1)).r >= p * nu_invariant(f, p**e).r


@pytest.mark.parametrize(
    "f, e, p, a, n, mu",
    [("x*y", 1, 3, "x,y", 1, 2), ("x^2", 1, 2, "y", 1, -1), ("x", 1, 2, "y", 2, 3), ("x*y", 1, 3, "x,y", 2, 8)],
)
def test_mu_examples(f, e, p, a, n, mu):
    r = PolyRing(p, 2)
    assert mu_invariant(r.parse(f), e, I(a, r), n) == mu


@given(
    maximal_polys(R2, max_terms=2, max_exp=2),
    st.lists(maximal_polys(R2, max_terms=2, max_exp=2), min_size=1, max_size=2),
    st.sampled_from([1, 2]),
)
def test_mu_matches_direct_expansion(f, gens, n):
    a = IdealHandle(gens, R2)
    Q = 2**n
    F = power(f, Q - 1).truncate(Q)
    if F.is_zero():
        expected = -1
    else:
        expected = 0
        while any(not (F * g).truncate(Q).is_zero() for g in ideal_power(a, expected + 1).generators):
            expected += 1
    assert mu_invariant(f, 1, a, n) == expected


def test_fedder_examples():
    res = fedder_pair_check(R2.parse("x*y"), 1, I("x,y", R2), 0, 1)
    assert res.result == "PURE" and res.n == 1 and res.witness == (1, 1)
    res = fedder_pair_check(R2.parse("x^2"), 1, I("y", R2), 0, 5)
    assert res.result == "UNKNOWN" and res.n is None
    assert "does not refute" in res.note
    res = fedder_pair_check(R3.parse("x*y"), 1, I("x,y", R3), 1, 2)
    assert res.result == "PURE" and res.n == 1


def test_fedder_least_level():
    # need ceil(t(3^n-1)) <= mu_n = 3^n - 1 - ... ; t = 1/2 passes at n = 1 already
    res = fedder_pair_check(R3.parse("x*y"), 1, I("x,y", R3), Fraction(1, 2), 3)
    assert res.n == 1
    res = fedder_pair_check(R3.parse("x*y"), 1, I("x,y", R3), Fraction(9, 8), 3)
    assert res.result == "UNKNOWN"


@pytest.mark.parametrize("q", [2, 4, 8])
def test_root_examples(q):
    x = R2.gen(0)
    assert frobenius_root(IdealHandle([x**q], R2), q).equals(IdealHandle([x], R2))
    assert frobenius_root(IdealHandle([x ** (q - 1)], R2), q).is_unit()
    assert frobenius_root(IdealHandle([x ** (q + 1)], R2), q).equals(IdealHandle([x], R2))


@given(st.integers(0, 40), st.integers(0, 40), st.sampled_from([3, 9, 27]))
def test_monomial_root_formula(a, b, q):
    r = R3
    mono = r.monomial((a, b))
    got = frobenius_root(IdealHandle([mono], r), q)
    assert got.equals(IdealHandle([r.monomial((a // q, b // q))], r))


def _monomial_ideals(ring, deg):
    monos = [m for m in itertools.product(range(deg + 1), repeat=ring.nvars) if sum(m) <= deg]
    for k in range(1, 3):
        for subset in itertools.combinations(monos, k):
            yield IdealHandle([ring.monomial(m) for m in subset], ring)


@given(st.lists(polys(R2, max_terms=3, max_exp=4), min_size=1, max_size=3), st.sampled_from([2, 4]))
def test_root_adjunction_and_minimality(gens, q):
    a = IdealHandle(gens, R2)
    root = frobenius_root(a, q)
    assert bracket_power(root, q).contains_ideal(a)
    for j in _monomial_ideals(R2, 2):
        if bracket_power(j, q).contains_ideal(a):
            assert j.contains_ideal(root)


@given(st.lists(polys(R3, max_terms=3, max_exp=12), min_size=1, max_size=2))
def test_root_composition(gens):
    a = IdealHandle(gens, R3)
    assert frobenius_root(frobenius_root(a, 3), 3).equals(frobenius_root(a, 9))


def test_ci_check_examples():
    rep = ci_check([R2.parse("x*y")])
    assert rep.is_fpure_ci and rep.emb_bound == 2
    assert not ci_check([R2.parse("x^2")]).is_fpure_ci
    r = PolyRing(3, 3)
    rep = ci_check([r.parse("x*y+z^2")])
    assert rep.is_fpure_ci and rep.emb_bound == 4
    assert rep.witness in power_reduced(r.parse("x*y+z^2"), 2, 3).terms


def test_ci_check_preconditions():
    with pytest.raises(ValueError):
        ci_check([])
    with pytest.raises(PreconditionError):
        ci_check([R2.parse("x+y^2")])
