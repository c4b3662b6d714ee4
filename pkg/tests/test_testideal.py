import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fthresh.errors import InputError, PreconditionError
from fthresh.frobenius import frobenius_root
from fthresh.groebner import IdealHandle, ideal_power
from fthresh.poly import PolyRing
from fthresh.testideal import (
    DivisorSpec,
    MixedExponent,
    allowed_denominators,
    candidates,
    jumping_numbers,
    ntau,
    orbit_batch_reports,
    orbit_discreteness,
    sweep_start,
    test_ideal,
    truncation,
)

from strategies import maximal_polys

R2 = PolyRing(2, 2)
R3 = PolyRing(3, 2)
R7 = PolyRing(7, 2)
F = Fraction


def I(text, ring):
    return IdealHandle.parse(text, ring)


def tau(obj, t, ring=None):
    return test_ideal(MixedExponent([(obj, F(t))])).ideal


@pytest.mark.parametrize("q, l, value", [(2, 1, F(1, 2)), (2, 3, F(7, 8)), (3, 2, F(4, 9)), (5, 0, F(0))])
def test_truncation(q, l, value):
    assert truncation(q, l) == value


def test_test_ideal_examples():
    x = R7.gen(0)
    assert tau(x, F(1, 2)).is_unit()
    assert tau(x, 1).equals(I("x", R7))
    res = test_ideal(MixedExponent([(R7.parse("x^2+y^3"), F(5, 6))]))
    assert res.stable and res.ideal.equals(I("x, y", R7))


def test_zero_entry_gives_zero_ideal():
    res = test_ideal(MixedExponent([(R7.zero(), F(1, 2))]))
    assert res.ideal.is_zero()


def test_mixed_exponent_validation():
    with pytest.raises(InputError):
        MixedExponent([(R7.gen(0), F(-1))])
    with pytest.raises(InputError):
        MixedExponent([(I("x,y", R7), F(1)), (I("x^2,y", R7), F(1))])


def test_mixed_product_of_principal_factors():
    # tau(x^(1/2) y^(1/2)) = (1); tau(x y^(1/2) m^2) = x * tau(y^(1/2) m^2) = x * m by the Newton polygon
    assert test_ideal(MixedExponent([(R3.gen(0), F(1, 2)), (R3.gen(1), F(1, 2))])).ideal.is_unit()
    got = test_ideal(MixedExponent([(R3.gen(0), F(1)), (R3.gen(1), F(1, 2)), (I("x,y", R3), F(2))])).ideal
    assert got.equals(I("x^2, x*y", R3))


def test_root_chain_matches_direct_roots():
    # (x^2+y^3)^(5/6) at p=7: roots of f^ceil(5/6 * 7^e) for e=1..3 agree from e=2 on
    f = R7.parse("x^2+y^3")
    roots = [frobenius_root(IdealHandle([f ** math.ceil(F(5, 6) * 7**e)], R7), 7**e) for e in (1, 2, 3)]
    assert roots[1].equals(roots[2])
    assert tau(f, F(5, 6)).equals(roots[2])


def test_monomial_ideal_formula():
    # tau((x^a, y^b)^t) for monomial ideals is given by the Newton polygon; check (x^2, y^2)^t
    a = I("x^2, y^2", R3)
    assert tau(a, F(1, 2)).is_unit()
    assert tau(a, 1).equals(I("x, y", R3))
    assert tau(a, F(3, 2)).equals(I("x^2, x*y, y^2", R3))


@pytest.mark.parametrize(
    "p, n, gens, t",
    [(3, 2, "x, y", F(15, 4)), (2, 3, "x, y, z", F(5, 2)), (2, 3, "x^2, y^3, z^6", F(1)), (3, 3, "x*y, y*z, x^3", F(7, 5))],
)
def test_monomial_formula_contains_root_chain(p, n, gens, t):
    # every finite level of the root chain lies inside the test ideal
    ring = PolyRing(p, n)
    a = IdealHandle.parse(gens, ring)
    full = tau(a, t)
    for e in (1, 2, 3):
        q = p**e
        assert full.contains_ideal(frobenius_root(ideal_power(a, math.ceil(t * q)), q))


def test_monomial_formula_values():
    ring = PolyRing(3, 2)
    assert tau(I("x, y", ring), F(15, 4)).equals(I("x^2, x*y, y^2", ring))
    ring3 = PolyRing(2, 3)
    assert tau(I("x^2, y^3, z^6", ring3), 1).equals(I("x, y, z", ring3))
    assert tau(I("x, y, z", ring3), F(5, 2)).is_unit()


def _corpus(ring):
    return [
        IdealHandle.parse(s, ring)
        for s in ("x", "x^2", "x*y", "x^2, y", "x, y", "x^2, y^3", "x^2+y^3", "x*y, x+y^2", "x^2, x*y, y^3")
    ]


@pytest.mark.parametrize("p", [2, 3])
def test_skoda(p):
    ring = PolyRing(p, 2)
    for a in _corpus(ring):
        l = len(a.generators)
        for t in (F(l), F(l) + F(1, 2)):
            lhs = tau(a, t)
            rhs = a * tau(a, t - 1)
            assert lhs.equals(rhs), (a.basis_strings(), t)


@pytest.mark.parametrize("p", [2, 3])
def test_power_scaling(p):
    ring = PolyRing(p, 2)
    for a in _corpus(ring):
        for r in (2, 3):
            for t in (F(1, 3), F(1, 2), F(5, 4)):
                assert tau(a, r * t).equals(tau(ideal_power(a, r), t))


@given(maximal_polys(R3, max_terms=3, max_exp=3), st.sampled_from([F(1, 4), F(1, 2), F(2, 3), F(1), F(7, 5)]))
def test_trace_transform(f, t):
    p = 3
    assert frobenius_root(tau(f, p * t), p).equals(tau(f, t))


@given(maximal_polys(R2, max_terms=3, max_exp=3), st.fractions(0, 2, max_denominator=8), st.fractions(0, 2, max_denominator=8))
def test_monotone_in_exponent(f, s, t):
    s, t = sorted((s, t))
    assert tau(f, s).contains_ideal(tau(f, t))


def test_ntau_examples():
    x, y = R7.gens()
    left = ntau(DivisorSpec(x), IdealHandle([y], R7), 0)
    assert left.stable and left.ideal.is_unit()
    assert tau(x, 1).equals(I("x", R7))
    plain = ntau(None, IdealHandle([x], R7), 1)
    assert plain.ideal.equals(I("x", R7)) and plain.epsilon == 0
    f = R7.parse("x^2+y^3")
    res = ntau(DivisorSpec(f), I("x, y", R7), 0)
    assert res.stable
    assert res.ideal.equals(tau(f, 1 - res.epsilon))
    assert res.ideal.equals(I("x, y", R7))


def test_ntau_sweep_start_separates_candidates():
    for q, bound, mult in ((3, 32, 1), (2, 10, 3), (7, 5, F(5, 2))):
        l = sweep_start(q, bound, mult)
        need = 8 * math.ceil(mult) * bound**2
        assert q**l > need >= q ** (l - 1)


@pytest.mark.parametrize("p", [2, 3])
def test_ntau_principal_skoda(p):
    ring = PolyRing(p, 2)
    div = DivisorSpec(ring.parse("x*y"), 1, F(1, p - 1))
    for gens in ("x^2+y^3", "x*y", "x+y^2"):
        a = IdealHandle.parse(gens, ring)
        for t in (F(1), F(3, 2), F(2)):
            lhs = ntau(div, a, t).ideal
            rhs = a * ntau(div, a, t - 1).ideal
            assert lhs.equals(rhs)


def test_jump_examples():
    x = R7.gen(0)
    rep = jumping_numbers(None, IdealHandle([x], R7), 0, 3)
    assert rep.values == [1, 2, 3] and rep.complete
    rep = jumping_numbers(None, IdealHandle([R7.parse("x^2+y^3")], R7), 0, 1)
    assert rep.values[0] == F(5, 6)
    for p in (2, 3, 5):
        ring = PolyRing(p, 2)
        rep = jumping_numbers(None, IdealHandle([ring.parse("x*y")], ring), 0, 1)
        assert rep.values == [1]


def test_jump_report_shape():
    rep = jumping_numbers(None, I("x^2, y^2", R3), 0, 3)
    ts = rep.values
    assert ts == sorted(set(ts)) and 0 not in ts
    for j in rep.jumps:
        assert j.before.contains_ideal(j.after) and not j.after.contains_ideal(j.before)
        assert j.side in ("left", "right")
    for a, b in zip(rep.jumps, rep.jumps[1:]):
        assert a.after.contains_ideal(b.after)


def test_jump_input_validation():
    with pytest.raises(InputError):
        jumping_numbers(None, I("x", R3), 1, 1)
    with pytest.raises(InputError):
        jumping_numbers(None, I("x", R3), -1, 1)


def test_unresolved_when_candidates_are_too_coarse():
    # 5/6 needs denominator 6 = 7 - 1, which bound 5 excludes
    rep = jumping_numbers(None, IdealHandle([R7.parse("x^2+y^3")], R7), 0, 1, denom_bound=5)
    assert F(5, 6) not in rep.values
    assert rep.unresolved and not rep.complete


def test_candidate_denominators():
    assert allowed_denominators(2, 8) == [1, 2, 3, 4, 6, 7, 8]
    cands = candidates(F(0), F(1), 2, 4)
    assert F(1, 2) in cands and F(1, 3) in cands and F(1, 5) not in cands


@pytest.mark.parametrize("p", [2, 3])
def test_jump_transform(p):
    ring = PolyRing(p, 2)
    for div in (None, DivisorSpec(ring.parse("x*y"), 1, F(1, p - 1))):
        for gens in ("x^2+y^3", "x*y^2"):
            a = IdealHandle.parse(gens, ring)
            base = jumping_numbers(div, a, 0, 3)
            scaled = jumping_numbers(None if div is None else div.scaled(p), a, 0, 3)
            for t in base.values:
                if p * t <= 3:
                    assert p * t in scaled.values


@pytest.mark.parametrize(
    "t, q, l, pre, cycle",
    [(F(1, 2), 2, 1, 1, [F(1)]), (F(5, 6), 7, 1, 0, [F(5, 6)]), (F(1, 3), 3, 1, 1, [F(1)])],
)
def test_orbit_examples(t, q, l, pre, cycle):
    rep = orbit_discreteness(t, q, l)
    assert rep.preperiod == pre and list(rep.cycle) == cycle and rep.period == len(cycle)


def test_orbit_rejects_nonpositive():
    with pytest.raises((InputError, PreconditionError)):
        orbit_discreteness(F(0), 2, 1)


@settings(max_examples=30)
@given(st.fractions(min_value=F(1, 10**4), max_value=5, max_denominator=10**4), st.sampled_from([2, 3, 5]), st.integers(1, 3))
def test_orbit_cycle_is_closed(t, q, l):
    rep = orbit_discreteness(t, q, l)
    cyc = list(rep.cycle)
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        y = q * a
        while y > l:
            y -= 1
        assert y == b
    for c in cyc:
        assert isinstance(c, Fraction)
        m = c.denominator
        while m % q == 0:
            m //= q
        assert t.denominator % m == 0 or math.gcd(m, q) == 1


def test_orbit_batch_matches_single():
    rng = random.Random(7)
    ts = [F(rng.randint(1, 10**6), rng.randint(1, 10**6)) for _ in range(15)]
    batch = orbit_batch_reports(ts, 3, 2)
    for t, rep in zip(ts, batch):
        assert rep == orbit_discreteness(t, 3, 2)
