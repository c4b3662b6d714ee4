import pytest
from hypothesis import given
from hypothesis import strategies as st

from fthresh.errors import BudgetExceeded, InputError, ParseError, PreconditionError
from fthresh.poly import (
    Poly,
    PolyRing,
    format_poly,
    in_box,
    is_prime,
    mul_reduced,
    parse_poly,
    parse_poly_list,
    parse_template,
    power,
    power_reduced,
)

from strategies import polys

R2_5 = PolyRing(5, 2)
R2_2 = PolyRing(2, 2)
R3_3 = PolyRing(3, 3)


@pytest.mark.parametrize(
    "text, n, p, terms",
    [
        ("x^2*y + 3*y^5", 2, 7, {(2, 1): 1, (0, 5): 3}),
        ("x + x", 1, 2, {}),
        ("y^3 - x^2", 2, 5, {(0, 3): 1, (2, 0): 4}),
        ("(x+y)^3 - 2*x*y^2", 2, 7, {(3, 0): 1, (2, 1): 3, (1, 2): 1, (0, 3): 1}),
        ("x1*x4^2 - 10", 4, 3, {(1, 0, 0, 2): 1, (0, 0, 0, 0): 2}),
        ("  - ( x ) ", 1, 3, {(1,): 2}),
    ],
)
def test_parse_examples(text, n, p, terms):
    assert dict(parse_poly(text, n, p).terms) == terms


@pytest.mark.parametrize("text", ["x^", "x +", "(x", "x)", "2x^", "x^y", "", "x ^ -1", "x**2"])
def test_parse_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_poly(text, 2, 5)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse_poly("x + * y", 2, 5)
    assert err.value.position == 4


def test_unknown_variable():
    with pytest.raises(ParseError, match="unknown variable"):
        parse_poly("z", 2, 5)
    with pytest.raises(ParseError):
        parse_poly("x5", 4, 5)


def test_prime_check():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    with pytest.raises(InputError):
        PolyRing(4, 2)


def test_generator_list():
    gens = parse_poly_list("x, (x+y)*y, y^2", R2_5)
    assert [format_poly(g) for g in gens] == ["x", "x*y + y^2", "y^2"]
    with pytest.raises(ParseError):
        parse_poly_list("x,,y", R2_5)


def test_template_slot():
    assert parse_template("x^2 + y^m", R2_5, "m", 4) == R2_5.parse("x^2+y^4")
    with pytest.raises(ParseError):
        parse_template("m*x", R2_5, "m", 4)
    with pytest.raises(InputError):
        parse_template("x^m", R2_5, "x", 4)


@pytest.mark.parametrize("q", [2, 4, 8])
def test_mul_reduced_examples(q):
    x = R2_2.gen(0)
    assert mul_reduced(x, x ** (q - 1), q).is_zero()
    f = R2_2.parse("x^3*y + x + y^5")
    assert mul_reduced(R2_2.one(), f, q) == f.truncate(q)


def test_mul_reduced_char2_square():
    f = R2_2.parse("x+y")
    assert mul_reduced(f, f, 4) == R2_2.parse("x^2+y^2")


def test_mul_reduced_mismatch():
    with pytest.raises(InputError):
        mul_reduced(R2_2.gen(0), PolyRing(3, 2).gen(0), 4)
    with pytest.raises(InputError):
        mul_reduced(R2_2.gen(0), PolyRing(2, 3).gen(0), 4)
    with pytest.raises(PreconditionError):
        mul_reduced(R2_2.gen(0), R2_2.gen(0), 6)


def test_power_reduced_examples():
    x = R2_5.gen(0)
    assert power_reduced(x, 4, 5) == x**4
    assert power_reduced(x, 5, 5).is_zero()
    assert power_reduced(x, 0, 5) == R2_5.one()
    r7 = PolyRing(7, 2)
    f = r7.parse("x^2+y^3")
    assert not power_reduced(f, 5, 7).is_zero()
    assert power_reduced(f, 6, 7).is_zero()
    with pytest.raises(PreconditionError):
        power_reduced(f, -1, 7)


def test_exponent_cap():
    with pytest.raises(BudgetExceeded):
        power_reduced(R2_2.gen(0), 3, 2**21)


def test_in_box():
    x, y = R2_5.gens()
    assert not in_box(x**4 * y**4, 5)
    assert in_box(x**5, 5)
    assert in_box(R2_5.zero(), 5)


@given(polys(R2_5), polys(R2_5), st.sampled_from([5, 25]))
def test_mul_reduced_commutes(f, g, q):
    assert mul_reduced(f, g, q) == mul_reduced(g, f, q)


@given(polys(R2_5), polys(R2_5), st.sampled_from([5, 25]))
def test_truncation_sound(f, g, q):
    assert mul_reduced(f, g, q) == (f * g).truncate(q)


@given(polys(R3_3, max_terms=3, max_exp=2), st.integers(0, 12), st.integers(0, 12), st.sampled_from([3, 9]))
def test_power_additive(f, r1, r2, q):
    lhs = power_reduced(f, r1 + r2, q)
    rhs = mul_reduced(power_reduced(f, r1, q), power_reduced(f, r2, q), q)
    assert lhs == rhs


@given(polys(R2_5, max_terms=3, max_exp=3), st.integers(0, 30))
def test_power_matches_repeated_product(f, r):
    expected = R2_5.one()
    for _ in range(r):
        expected = expected * f
    assert power(f, r) == expected


@given(polys(R3_3, max_exp=6))
def test_print_parse_round_trip(f):
    text = format_poly(f)
    assert parse_poly(text, 3, 3) == f
    assert format_poly(parse_poly(text, 3, 3)) == text


@given(polys(PolyRing(7, 5), max_exp=3))
def test_round_trip_indexed_variables(f):
    assert parse_poly(str(f), 5, 7) == f


def test_coefficients_never_zero():
    f = Poly(R2_5, {(1, 0): 5, (0, 1): 7, (2, 2): -1})
    assert dict(f.terms) == {(0, 1): 2, (2, 2): 4}


def test_frobenius_is_ring_map():
    f = R3_3.parse("x + 2*y*z + 1")
    assert power(f, 9) == f.frobenius(9)
