import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.exceptions import FamilyError, InputError
from app.services import linalg
from app.services.families import random_family, random_levi, random_point
from app.services.polytope import (
    CM_MODES,
    PositiveOrthogonalFamily,
    chamber_partition_check,
    check_generic,
    cm_member,
    cone_member,
    family_point_for,
    hn_point,
    hull_member,
    langlands_indicator,
    trivial_family,
    validate_family,
)
from app.services.rootdata import Parabolic, make_group, p_of, project, root_bases, torus, whole
from app.services.suites import check_hn, check_polytope, sample_near
from app.services.weights import generic_directions

from .conftest import B, B_BAR, segment


def v2(a):
    a = Fraction(a)
    return (a, -a)


def test_segment_adjacency_coefficient(segment_family):
    assert validate_family(segment_family) == {(B, B_BAR): 3, (B_BAR, B): 3}


def test_reversed_segment_is_not_positive(sl2):
    with pytest.raises(FamilyError):
        validate_family(PositiveOrthogonalFamily.build(sl2, torus(sl2), {B: v2(0), B_BAR: v2(3)}))


def test_non_colinear_difference(sl3):
    T = torus(sl3)
    points = {P: linalg.zero(3) for P in p_of(T)}
    points[Parabolic.from_key("1|2|3")] = (Fraction(1), Fraction(1), Fraction(-2))
    with pytest.raises(FamilyError):
        validate_family(PositiveOrthogonalFamily.build(sl3, T, points))


def test_family_must_be_indexed_by_p_of_m(sl2):
    with pytest.raises(FamilyError):
        PositiveOrthogonalFamily.build(sl2, torus(sl2), {B: v2(1)})


def test_negative_scaling_is_rejected(segment_family):
    with pytest.raises(FamilyError):
        segment_family.scaled(-1)
    assert segment_family.scaled(Fraction(1, 3)).point(B) == v2(1)


def test_family_operations(segment_family):
    moved = segment_family.translate(v2(1))
    assert moved.point(B_BAR) == v2(1)
    summed = segment_family.minkowski(segment(2))
    assert validate_family(summed)[(B, B_BAR)] == 5
    assert segment_family.to_json()["points"] == {"1|2": ["3/1", "-3/1"], "2|1": ["0/1", "0/1"]}


def test_family_point_for(segment_family, sl2):
    assert family_point_for(segment_family, B) == v2(3)
    assert family_point_for(segment_family, Parabolic.from_key("1,2")) == v2(0)
    with pytest.raises(InputError):
        family_point_for(segment_family, Parabolic.from_key("1|2|3"))


@pytest.mark.parametrize("H,kind,expected", [
    (v2(1), "acute", True),
    (v2(-1), "acute", False),
    (v2(1), "obtuse_open", True),
    (v2(0), "obtuse_open", False),
    (v2(0), "obtuse_closed", True),
])
def test_cone_member(H, kind, expected):
    assert cone_member(B, H, kind) is expected


def test_cone_member_rejects_unknown_kind():
    with pytest.raises(InputError):
        cone_member(B, v2(1), "round")


@pytest.mark.parametrize("a,closed,inside", [
    (1, False, True),
    (3, False, False),
    (3, True, True),
    (0, True, True),
    (4, True, False),
    (-1, True, False),
])
def test_segment_polytope(segment_family, a, closed, inside):
    for mode in CM_MODES:
        assert cm_member(segment_family, v2(a), closed, mode) is inside
    if closed:
        assert hull_member(segment_family, v2(a)) is inside


@pytest.mark.parametrize("xi,q,rho,dist2", [
    (5, "1|2", 3, 8),
    (-2, "2|1", 0, 8),
    (1, "1,2", 1, 0),
    (Fraction(7, 2), "1|2", 3, Fraction(1, 2)),
])
def test_hn_point_on_segment(segment_family, xi, q, rho, dist2):
    result = hn_point(segment_family, v2(xi))
    assert result.q.key == q
    assert result.rho == v2(rho)
    assert result.dist2 == dist2


def test_hn_report_format(segment_family):
    assert hn_point(segment_family, v2(5)).to_json() == {"rho": ["3/1", "-3/1"], "q": "1|2", "dist2": "8/1"}


def test_trivial_family_is_a_point(sl3):
    f = trivial_family(sl3, torus(sl3))
    assert hull_member(f, linalg.zero(3))
    assert not hull_member(f, (Fraction(1), Fraction(0), Fraction(-1)))
    assert hn_point(f, (Fraction(1), Fraction(0), Fraction(-1))).dist2 == 2


@pytest.mark.parametrize("mu,expected", [(1, 1), (5, 0), (-1, 0), (Fraction(5, 2), 1)])
def test_langlands_indicator_on_segment(segment_family, mu, expected):
    for lam0 in (v2(1), v2(-1), v2(3)):
        assert langlands_indicator(segment_family, v2(mu), lam0) == expected


def test_langlands_needs_a_generic_direction(segment_family):
    with pytest.raises(InputError):
        check_generic(segment_family.levi, v2(0))
    with pytest.raises(InputError):
        langlands_indicator(segment_family, v2(1), v2(0))


@pytest.mark.parametrize("v,key", [
    ((1, 0, -1), "1|2|3"),
    ((-1, 0, 1), "3|2|1"),
    ((0, 0, 0), "1,2,3"),
    ((1, 1, -2), "1,2|3"),
    ((-2, 1, 1), "2,3|1"),
])
def test_chamber_partition(sl3, v, key):
    assert chamber_partition_check(sl3, [Fraction(x) for x in v]).key == key


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_random_families_are_positive(seed, n):
    rng = random.Random(seed)
    g = make_group(n)
    f = random_family(g, random_levi(g, rng), rng)
    assert all(x >= 0 for x in validate_family(f).values())
    assert all(hull_member(f, Y) for _, Y in f.entries)


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_cm_descriptions_agree_with_the_hull(seed, n):
    rng = random.Random(seed)
    g = make_group(n)
    f = random_family(g, random_levi(g, rng), rng)
    assert check_polytope(f, rng, 20) > 0


@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_hn_point_is_nearest(seed, n):
    rng = random.Random(seed)
    g = make_group(n)
    f = random_family(g, random_levi(g, rng), rng)
    assert check_hn(f, rng, 20) > 0


@given(st.integers(0, 10_000))
def test_langlands_matches_hull_off_walls(seed):
    rng = random.Random(seed)
    g = make_group(3)
    f = random_family(g, torus(g), rng)
    lam0 = generic_directions(f.levi, 1, rng)[0]
    for _ in range(10):
        mu = project(sample_near(f, rng), f.levi)
        on_wall = any(
            linalg.dot(w, linalg.sub(mu, Y)) == 0
            for P, Y in f.entries
            for w in root_bases(P).fundamental
        )
        if not on_wall:
            assert langlands_indicator(f, mu, lam0) == int(hull_member(f, mu))


def test_whole_group_family(sl3):
    f = trivial_family(sl3, whole(sl3))
    xi = random_point(sl3, random.Random(1))
    assert cm_member(f, xi, closed=True)
    assert hn_point(f, xi).dist2 == 0
