from fractions import Fraction

import pytest

from app.core.exceptions import InputError, WindowError
from app.services import adelic
from app.services.adelic import (
    B,
    B_BAR,
    AdelicPoint,
    LocalClass,
    build_char,
    certified_window,
    check_iwasawa_levi,
    descent_check,
    elliptic_local_sets,
    expected_local_classes,
    fiber_count_direct,
    fiber_count_formula,
    fiber_points,
    formula_forms,
    gl2_bound_check,
    idele_classes,
    local_quotient_rank,
    local_springer,
    norm_one_constants,
    orbit_representatives,
    orbital_integral,
    principal_part,
    stabilizer,
    torus_side,
    vmq_vml_spot_check,
    vol_at,
)
from app.services.fields import infinity, parse_place, parse_rational_function, places
from app.services.rootdata import torus, whole
from app.services.series import NormalizedScalar

XIS = [(Fraction(1, 3), Fraction(-1, 3)), (Fraction(1, 2), Fraction(-1, 2)), (Fraction(7, 4), Fraction(-7, 4))]

# (q, D, lambda, window, expected count)
SPLIT_INSTANCES = [
    (3, [("t", 1)], "(t+1)/t", None, 1),
    (5, [("t", 1)], "(t+2)/t", None, 1),
    (3, [("t", 1)], "1", None, 1),
    (3, [("t", 2)], "(t^2+1)/t^2", 2, 8),
    (3, [("t", 2)], "(t+1)^2/t^2", 3, 7),
    (5, [("t", 1), ("t+1", 1)], "(t+2)*(t+3)/(t*(t+1))", None, 10),
    (3, [], "1", None, 0),
]


@pytest.fixture(scope="module")
def split_q3():
    return build_char(3, [("t", 1)], lam="(t+1)/t")


@pytest.fixture(scope="module")
def elliptic_q3():
    return build_char(3, [], companion=(0, 1))


@pytest.mark.parametrize("q,D,lam,window,expected", SPLIT_INSTANCES)
def test_direct_count_matches_formula(q, D, lam, window, expected):
    c = build_char(q, D, lam=lam)
    for xi in XIS:
        assert fiber_count_direct(c, xi, window) == expected
        assert fiber_count_formula(c, xi, window) == expected


def test_both_forms_of_the_formula_agree(split_q3):
    w_form, v_form = formula_forms(split_q3, XIS[0])
    assert w_form == v_form == 1


def test_local_data(split_q3):
    v = parse_place("t+1", 3)
    assert split_q3.m_at(v) == 1
    assert split_q3.m_at(parse_place("t", 3)) == 0
    assert split_q3.relevant_places == (v,)
    assert certified_window(split_q3, v) == 2
    classes = local_springer(split_q3, v)
    assert len(classes) == 3
    assert [cls.key for cls in classes] == [cls.key for cls in expected_local_classes(split_q3, v)]


def test_window_below_the_bound(split_q3):
    with pytest.raises(WindowError):
        local_springer(split_q3, parse_place("t+1", 3), window=1)


def test_principal_part():
    v = parse_place("t", 3)
    assert principal_part(parse_rational_function("(t+1)/t", 3), v) == parse_rational_function("1/t", 3)
    assert principal_part(parse_rational_function("t^2+1", 3), v).is_zero()
    with pytest.raises(InputError):
        principal_part(parse_rational_function("t", 3), parse_place("inf", 3))


def test_orbit_stabilizers():
    c = build_char(5, [("t", 1)], lam="(t+2)/t")
    sizes = sorted(len(stabilizer(AdelicPoint(c, 0, classes))) for classes in orbit_representatives(c))
    assert sizes == [2, 2, 2, 2, 4]


def test_points_meet_the_positivity_bound(split_q3):
    points = fiber_points(split_q3, XIS[1])
    assert points
    assert all(gl2_bound_check(pt) for pt in points)


def test_elliptic_count(elliptic_q3):
    assert len(stabilizer(AdelicPoint(elliptic_q3, 0, ()))) == 4
    assert vol_at(elliptic_q3) == Fraction(1, 4)
    assert fiber_count_direct(elliptic_q3, XIS[0]) == Fraction(1, 4)
    assert fiber_count_formula(elliptic_q3, XIS[0]) == Fraction(1, 4)


def test_elliptic_rejections():
    with pytest.raises(InputError):
        build_char(3, [("t", 1)], companion=(0, 1))
    with pytest.raises(InputError):
        build_char(3, [], companion=(0, 2))
    with pytest.raises(InputError):
        build_char(3, [], lam="1", companion=(0, 1))


@pytest.mark.parametrize("q,D,lam", [
    (3, [], "1/t"),
    (3, [], "t"),
    (3, [("t", 1)], "1/t"),
    (2, [("t", 1)], "(t+1)/t"),
    (3, [("inf", 1)], "1"),
    (3, [("t", -1)], "1"),
    (3, [], "0"),
    (4, [], "t"),
])
def test_invalid_spectral_data(q, D, lam):
    with pytest.raises(InputError):
        build_char(q, D, lam=lam)


def test_xi_must_be_general(split_q3):
    with pytest.raises(InputError):
        fiber_count_direct(split_q3, (Fraction(1), Fraction(-1)))


def test_orbital_integrals(split_q3):
    assert orbital_integral(split_q3, "one") == 3
    assert orbital_integral(split_q3, "wM", xi=XIS[0]) == 2
    assert isinstance(orbital_integral(split_q3, "vM"), NormalizedScalar)
    with pytest.raises(InputError):
        orbital_integral(split_q3, "heat")
    with pytest.raises(InputError):
        orbital_integral(split_q3, "wM")
    with pytest.raises(InputError):
        orbital_integral(split_q3, "vQ")


def test_descent(split_q3):
    assert torus_side(split_q3) == 1
    for Q in (B, B_BAR):
        assert descent_check(split_q3, Q) == (3, 3)


def test_descent_in_the_gl2_layer():
    c = build_char(2, [("t", 1)], lam="(t+1)/t", lam2="0")
    assert c.deg_D == 1
    assert descent_check(c, B) == (2, 2)


def test_descent_needs_split_data(elliptic_q3):
    with pytest.raises(InputError):
        descent_check(elliptic_q3)


def test_iwasawa_levi_spot_checks(split_q3):
    assert vmq_vml_spot_check(split_q3, limit=50) == 50
    v = parse_place("t", 3)
    cls = LocalClass(v, 2, parse_rational_function("(t+2)/t^3", 3))
    assert check_iwasawa_levi(cls, B)
    assert check_iwasawa_levi(cls, B_BAR)


def test_datum_json(split_q3):
    assert split_q3.to_json() == {
        "q": 3,
        "D": [["t", 1]],
        "levi": "T",
        "eigenvalues": ["(t+1)/t", "(2*t+2)/t"],
    }
    assert adelic.GROUP.n == 2


@pytest.mark.parametrize("q,deg_bound", [(3, 1), (3, 2), (3, 3), (5, 1), (7, 1)])
def test_split_idele_classes(q, deg_bound):
    c = build_char(q, [("t", 1)], lam="(t+1)/t")
    count = idele_classes(c, deg_bound)
    assert count.support == tuple(places(q, deg_bound))
    assert count.classes == 1
    assert count.units == q - 1
    assert vol_at(c, deg_bound) == Fraction(1, q - 1)


@pytest.mark.parametrize("q,companion", [(3, (0, 1)), (5, (0, 2)), (2, (1, 1))])
def test_elliptic_idele_classes(q, companion):
    c = build_char(q, [], companion=companion)
    assert len(norm_one_constants(c)) == q + 1
    for deg_bound in (1, 2):
        count = idele_classes(c, deg_bound)
        assert all(v.degree % 2 == 0 for v in count.support)
        assert len(count.support) == (0 if deg_bound == 1 else (q * q - q) // 2)
        assert count.volume == Fraction(1, q + 1)


def test_local_quotient_ranks(split_q3, elliptic_q3):
    t2 = parse_place("t^2+1", 3)
    assert local_quotient_rank(split_q3, t2) == 1
    assert local_quotient_rank(elliptic_q3, t2) == 1
    assert local_quotient_rank(elliptic_q3, infinity(3)) == 0
    assert local_quotient_rank(elliptic_q3, parse_place("t", 3)) == 0


@pytest.mark.parametrize("q,companion", [(3, (0, 1)), (5, (0, 2))])
def test_elliptic_direct_count_scans_every_degree_one_place(q, companion):
    c = build_char(q, [], companion=companion)
    local_sets = elliptic_local_sets(c)
    assert list(local_sets) == places(q, 1)
    assert infinity(q) in local_sets
    for v, found in local_sets.items():
        assert [(cls.a, cls.y.is_zero()) for cls in found] == [(0, True)]
    pt = AdelicPoint(c, 0, tuple(cls for found in local_sets.values() for cls in found))
    assert len(stabilizer(pt)) == q + 1
    assert fiber_count_direct(c, XIS[0]) == Fraction(1, q + 1)
    assert fiber_count_formula(c, XIS[0]) == Fraction(1, q + 1)


def test_elliptic_lattice_sets_need_elliptic_data(split_q3):
    with pytest.raises(InputError):
        elliptic_local_sets(split_q3)


def test_levi_weights(split_q3):
    T, G = torus(adelic.GROUP), whole(adelic.GROUP)
    assert orbital_integral(split_q3, "vL", L=T) == orbital_integral(split_q3, "one") == 3
    assert orbital_integral(split_q3, "vL", L=T) == orbital_integral(split_q3, "vQ", Q=B)
    assert orbital_integral(split_q3, "vL", L=G) == orbital_integral(split_q3, "vM")
    with pytest.raises(InputError):
        orbital_integral(split_q3, "vL")


@pytest.mark.parametrize("D,lam", [([("t", 1)], "(t+1)/t"), ([("t", 2)], "(t+1)^2/t^2")])
def test_orbits_are_stable_past_the_certified_window(D, lam):
    c = build_char(3, D, lam=lam)
    bound = max(certified_window(c, v) for v in c.relevant_places)
    keys = []
    for window in (bound, bound + 1, bound + 2):
        keys.append(sorted(tuple(cls.key for cls in classes) for classes in orbit_representatives(c, window)))
    assert keys[0] == keys[1] == keys[2]
    assert fiber_count_direct(c, XIS[0], bound) == fiber_count_direct(c, XIS[0], bound + 2)


def test_elliptic_levi_weight_is_the_plain_count(elliptic_q3):
    assert orbital_integral(elliptic_q3, "vL", L=whole(adelic.GROUP)) == orbital_integral(elliptic_q3, "one") == 1
    with pytest.raises(InputError):
        orbital_integral(elliptic_q3, "vL", L=torus(adelic.GROUP))
