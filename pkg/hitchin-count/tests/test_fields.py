import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.exceptions import InputError
from app.services.fields import (
    FqPoly,
    RationalFunction,
    count_irreducibles,
    factor_places,
    finite_field,
    infinity,
    inverse_mod,
    parse_place,
    parse_rational_function,
    places,
    poly_gcd,
    residue_representatives,
)

FIELD_SIZES = (2, 3, 4, 5, 7, 8, 9)


@pytest.mark.parametrize("q", [1, 6, 12])
def test_rejects_non_prime_powers(q):
    with pytest.raises(InputError):
        finite_field(q)


def test_rejects_fields_above_the_configured_bound():
    with pytest.raises(InputError):
        finite_field(11)


def test_f4_multiplication():
    F = finite_field(4)
    a = F.generator
    assert F.mul(a, a) == F.add(a, 1)
    assert F.label(F.add(a, 1)) == "a+1"
    with pytest.raises(InputError):
        finite_field(5).generator


@given(st.sampled_from(FIELD_SIZES), st.data())
def test_field_axioms(q, data):
    F = finite_field(q)
    x, y, z = (data.draw(st.integers(0, q - 1)) for _ in range(3))
    assert F.mul(x, F.add(y, z)) == F.add(F.mul(x, y), F.mul(x, z))
    assert F.add(x, F.neg(x)) == 0
    if x:
        assert F.mul(x, F.inv(x)) == 1
        assert F.power(x, q - 1) == 1


@pytest.mark.parametrize("q,d,count", [(2, 1, 2), (2, 2, 1), (2, 3, 2), (2, 4, 3), (3, 2, 3), (4, 2, 6)])
def test_irreducible_counts(q, d, count):
    assert count_irreducibles(q, d) == count


def test_places_up_to_degree_two():
    found = places(3, 2)
    assert len(found) == 3 + 3 + 1
    assert found[-1] == infinity(3)
    assert [v.degree for v in found[:-1]] == [1, 1, 1, 2, 2, 2]


@pytest.mark.parametrize("text,q,expected", [
    ("(t+1)/t", 3, "(t+1)/t"),
    ("t^2 + 2*t + 1", 3, "t^2+2*t+1"),
    ("2t", 3, "2*t"),
    ("(2*t)/(2*t^2)", 3, "1/t"),
    ("(t+2)*(t+3)/(t*(t+1))", 5, "(t^2+1)/(t^2+t)"),
    ("-1", 3, "2"),
    ("a*t", 4, "a*t"),
])
def test_parse_rational_function(text, q, expected):
    assert str(parse_rational_function(text, q)) == expected


@pytest.mark.parametrize("text", ["t +", "t/0", "x", "(t+1", "t^-1"])
def test_parse_errors(text):
    with pytest.raises(InputError):
        parse_rational_function(text, 3)


def test_parse_generator_needs_an_extension():
    with pytest.raises(InputError):
        parse_rational_function("a", 3)


def test_place_valuations():
    v = parse_place("t", 3)
    r = parse_rational_function("(t+1)/t^2", 3)
    assert v.valuation(r) == -2
    assert infinity(3).valuation(r) == 1
    assert v.valuation(RationalFunction(FqPoly(finite_field(3)))) == float("inf")
    assert infinity(3).uniformizer() == parse_rational_function("1/t", 3)


def test_parse_place():
    v = parse_place("t^2+1", 3)
    assert (v.degree, v.size, v.key) == (2, 9, "t^2+1")
    assert parse_place("inf", 3).is_infinite
    with pytest.raises(InputError):
        parse_place("t^2", 3)
    with pytest.raises(InputError):
        parse_place("1/t", 3)


def test_factor_places():
    f = parse_rational_function("t^3 + t^2", 3).num
    assert [(v.key, e) for v, e in factor_places(f)] == [("t", 2), ("t+1", 1)]
    with pytest.raises(InputError):
        factor_places(FqPoly(finite_field(3)))


def test_residue_representatives():
    assert len(residue_representatives(parse_place("t^2+1", 3))) == 9
    with pytest.raises(InputError):
        residue_representatives(infinity(3))


def test_inverse_mod():
    F = finite_field(3)
    a = parse_rational_function("t+1", 3).num
    m = parse_rational_function("t^2", 3).num
    assert (a * inverse_mod(a, m)) % m == FqPoly.constant(F, 1)
    assert poly_gcd(a, m) == FqPoly.constant(F, 1)


def test_values_at_infinity():
    assert parse_rational_function("(t+1)/t", 3).at_infinity() == 1
    assert parse_rational_function("1/t", 3).at_infinity() == 0
    with pytest.raises(InputError):
        parse_rational_function("t", 3).at_infinity()


monic_coeffs = st.lists(st.integers(0, 4), min_size=1, max_size=4).map(lambda c: c + [1])


@given(monic_coeffs, monic_coeffs)
def test_product_formula(num, den):
    F = finite_field(5)
    r = RationalFunction(FqPoly(F, num), FqPoly(F, den))
    finite = {v for v, _ in factor_places(r.num)} | {v for v, _ in factor_places(r.den)}
    total = sum(v.degree * v.valuation(r) for v in finite) + infinity(5).valuation(r)
    assert total == 0
