import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.exceptions import ConsistencyError, InputError
from app.services.rootdata import make_group, torus, whole
from app.services.series import NormalizedScalar, SeriesQ, bernoulli, exp_linear, scalar_sum

T2 = torus(make_group(2))
G2 = whole(make_group(2))


def test_exact_polynomial_arithmetic():
    one_plus = SeriesQ({0: 1, 1: 1})
    one_minus = SeriesQ({0: 1, 1: -1})
    product = one_plus * one_minus
    assert product.is_exact()
    assert product == SeriesQ({0: 1, 2: -1})
    assert (one_plus - one_plus).coeffs == {}
    assert (one_plus + 2).coefficient(0) == 3


def test_unknown_coefficients_raise():
    s = SeriesQ({0: 1}, prec=3)
    assert s.coefficient(2) == 0
    with pytest.raises(ConsistencyError):
        s.coefficient(3)


def test_precision_propagates_through_products():
    a = SeriesQ({-1: 1}, prec=3)
    b = SeriesQ({0: 1}, prec=2)
    assert (a * b).prec == 1
    assert (a + b).prec == 2
    assert a.shift(2).prec == 5
    assert a.shift(2).valuation() == 1


def test_geometric_inverse():
    inv = SeriesQ({0: 1, 1: -1}).inverse(order=5)
    assert inv.prec == 5
    assert inv == SeriesQ({k: 1 for k in range(5)}, prec=5)


def test_monomial_inverse_is_exact():
    inv = SeriesQ.monomial(Fraction(2, 3), 2).inverse()
    assert inv.is_exact()
    assert inv == SeriesQ.monomial(Fraction(3, 2), -2)


def test_inverse_needs_an_order_or_precision():
    with pytest.raises(InputError):
        SeriesQ({0: 1, 1: 1}).inverse()
    with pytest.raises(ConsistencyError):
        SeriesQ({}, prec=4).inverse()


def test_exp_linear_coefficients():
    s = exp_linear(2, 4)
    assert [s.coefficient(k) for k in range(4)] == [1, 2, 2, Fraction(4, 3)]
    assert s.prec == 4


def test_exp_of_a_series():
    assert SeriesQ({1: 1}).exp(5) == exp_linear(1, 5)
    with pytest.raises(InputError):
        SeriesQ({0: 1}).exp(3)


def test_bernoulli_series():
    b = bernoulli(5)
    assert [b.coefficient(k) for k in range(5)] == [1, Fraction(-1, 2), Fraction(1, 12), 0, Fraction(-1, 720)]


def test_rescale():
    s = SeriesQ({1: 1, 2: 1}).rescale(2)
    assert s == SeriesQ({1: 2, 2: 4})
    with pytest.raises(InputError):
        s.rescale(0)


series_coeffs = st.lists(st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)), min_size=1, max_size=6)


@given(series_coeffs, st.integers(-3, 3))
def test_inverse_times_self_is_one(coeffs, shift):
    if coeffs[0] == 0:
        coeffs[0] = Fraction(1)
    s = SeriesQ(dict(enumerate(coeffs))).shift(shift)
    product = s * s.inverse(order=6)
    assert product.principal_part() == {}
    for d in range(0, int(min(product.prec, 6))):
        assert product.coefficient(d) == (1 if d == 0 else 0)


@given(st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)),
       st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)))
def test_exp_linear_is_multiplicative(a, b):
    assert (exp_linear(a, 6) * exp_linear(b, 6)) == exp_linear(a + b, 6)


def test_normalized_scalar_rejects_unknown_kinds():
    with pytest.raises(InputError):
        NormalizedScalar.of(1, {("adjoint", T2): 1})


def test_normalized_scalar_products_and_sums():
    a = NormalizedScalar.of(3, {("scnx", T2): 1})
    b = NormalizedScalar.of(Fraction(1, 2), {("full", T2): 1})
    assert (a + b).normalized() == NormalizedScalar.of(Fraction(7, 2), {("scnx", T2): 1})
    assert (a * NormalizedScalar.of(2, {("scnx", T2): -1})).rational() == 6
    assert not a.is_rational()
    with pytest.raises(ConsistencyError):
        a.rational()
    with pytest.raises(ConsistencyError):
        a + NormalizedScalar.of(1)


def test_zero_and_rank_zero_factors():
    assert NormalizedScalar.of(0, {("scnx", T2): 2}) == NormalizedScalar.of(0)
    assert NormalizedScalar.of(5, {("full", G2): 1}).rational() == 5
    assert scalar_sum([]) == NormalizedScalar.of(0)
    assert scalar_sum([NormalizedScalar.of(1), NormalizedScalar.of(2)]).rational() == 3


def test_normalized_scalar_json():
    out = NormalizedScalar.of(Fraction(3), {("scnx", T2): 1}).to_json()
    assert out["value"] == "3/1"
    assert out["reference"] == "covol(X_*({{1},{2}})_scnx)^1"


def test_equal_scalars_hash_equally():
    a = NormalizedScalar.of(2, {("full", T2): 1})
    b = NormalizedScalar.of(2, {("scnx", T2): 1})
    assert a == b
    assert hash(a) == hash(b)
    assert math.isinf(SeriesQ.constant(1).prec)
