from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.exceptions import InputError
from app.services import linalg
from app.services.rootdata import (
    Levi,
    Parabolic,
    adjacency_coroot,
    adjacent_wall,
    cochar_lattice,
    coset_representatives,
    covolume_ratio,
    enumerate_levis,
    f_of,
    is_general_position,
    lattice_index,
    make_group,
    maximal_parabolics,
    p_of,
    parabolics_over,
    project,
    root_bases,
    torus,
    whole,
)

from .conftest import trace_zero


@pytest.mark.parametrize("n,count", [(2, 2), (3, 5), (4, 15)])
def test_levi_count_is_bell_number(n, count):
    assert len(enumerate_levis(make_group(n))) == count


@pytest.mark.parametrize("n,p_count,f_count", [(2, 2, 3), (3, 6, 13), (4, 24, 75)])
def test_parabolics_of_the_torus(n, p_count, f_count):
    T = torus(make_group(n))
    assert len(p_of(T)) == p_count
    assert len(f_of(T)) == f_count
    assert all(P.levi == T for P in p_of(T))


def test_whole_group_has_a_single_parabolic(sl3):
    G = whole(sl3)
    assert [P.key for P in p_of(G)] == ["1,2,3"]
    assert [P.key for P in f_of(G)] == ["1,2,3"]
    assert G.rank == 0


def test_parabolic_keys_are_one_based():
    P = Parabolic.from_key("1,2|3")
    assert P.order == ((0, 1), (2,))
    assert P.key == "1,2|3"
    assert P.to_json() == [[1, 2], [3]]
    assert P.levi == Levi.of([[2], [0, 1]])


@pytest.mark.parametrize("key", ["1|x", "1,1|2", "2|3"])
def test_bad_parabolic_keys(key):
    with pytest.raises(InputError):
        Parabolic.from_key(key)


def test_parabolic_containment():
    Q = Parabolic.from_key("1,2|3")
    assert Q.contains(Parabolic.from_key("1|2|3"))
    assert Q.contains(Parabolic.from_key("2|1|3"))
    assert not Q.contains(Parabolic.from_key("1|3|2"))
    assert not Parabolic.from_key("1|2").contains(Parabolic.from_key("2|1"))
    assert Parabolic.from_key("1,2").contains(Parabolic.from_key("2|1"))


def test_parabolics_over_restricts_to_subgroups(sl3):
    T = torus(sl3)
    Q = Parabolic.from_key("1,2|3")
    p_list, f_list = parabolics_over(T, Q)
    assert sorted(P.key for P in p_list) == ["1|2|3", "2|1|3"]
    assert all(Q.contains(P) for P in f_list)
    assert Q in f_list


def test_maximal_parabolics_have_two_blocks(sl3):
    maximal = maximal_parabolics(torus(sl3))
    assert len(maximal) == 6
    assert all(len(P.order) == 2 for P in maximal)


def test_group_checks():
    with pytest.raises(InputError):
        make_group(1)
    g = make_group(2)
    with pytest.raises(InputError):
        g.check([1, 1])
    with pytest.raises(InputError):
        g.check([1, -1, 0])
    assert g.to_ambient([3, 1]) == (Fraction(1), Fraction(-1))


def test_levi_must_be_a_set_partition():
    with pytest.raises(InputError):
        Levi.of([[0, 1], [1, 2]])
    with pytest.raises(InputError):
        Levi.of([[0], [2]])


@pytest.mark.parametrize("key", ["1|2|3", "2,3|1", "1|2,4|3", "4,1|3|2"])
def test_fundamental_weights_are_dual_to_coroots(key):
    bases = root_bases(Parabolic.from_key(key))
    for i, w in enumerate(bases.fundamental):
        for j, c in enumerate(bases.coroots):
            assert linalg.dot(w, c) == (1 if i == j else 0)


def test_adjacency_coroot():
    B, B_bar = Parabolic.from_key("1|2"), Parabolic.from_key("2|1")
    assert adjacency_coroot(B, B_bar) == (Fraction(1), Fraction(-1))
    assert adjacency_coroot(Parabolic.from_key("1|2|3"), Parabolic.from_key("3|2|1")) is None
    assert adjacency_coroot(Parabolic.from_key("1|2|3"), Parabolic.from_key("2|1|3")) is not None


def test_adjacency_needs_a_consecutive_swap():
    P = Parabolic.from_key("1|2|3|4")
    assert adjacency_coroot(P, Parabolic.from_key("2|4|3|1")) is None
    assert adjacency_coroot(P, Parabolic.from_key("2|1|4|3")) is None
    assert adjacency_coroot(P, Parabolic.from_key("1|3|2|4")) == root_bases(P).coroots[1]
    assert adjacent_wall(P, Parabolic.from_key("1|2|4|3")) == 2
    assert adjacent_wall(P, P) is None
    with pytest.raises(InputError):
        adjacent_wall(P, Parabolic.from_key("1,2|3|4"))


@pytest.mark.parametrize("n", [3, 4])
def test_swapped_chambers_share_a_wall(n):
    for P in p_of(torus(make_group(n))):
        for i in range(n - 1):
            order = list(P.order)
            order[i], order[i + 1] = order[i + 1], order[i]
            P2 = Parabolic(tuple(order))
            assert adjacent_wall(P, P2) == i
            assert adjacency_coroot(P2, P) == linalg.neg(adjacency_coroot(P, P2))


@given(trace_zero(4))
def test_projection_splits_a_vector(v):
    P = Parabolic.from_key("1,3|2|4")
    v_p = project(v, P)
    v_tp = project(v, P, "onto_aTP")
    assert linalg.add(v_p, v_tp) == v
    assert project(v_p, P) == v_p
    assert linalg.dot(v_p, v_tp) == 0


def test_unknown_projection_part(sl2):
    with pytest.raises(InputError):
        project((Fraction(1), Fraction(-1)), torus(sl2), "sideways")


def test_lattices_of_the_torus(sl3):
    T = torus(sl3)
    full, scnx = cochar_lattice(T, "full"), cochar_lattice(T, "scnx")
    assert full.rank == scnx.rank == 2
    assert covolume_ratio(full, scnx) == 1
    assert lattice_index(T) == len(coset_representatives(T))
    assert full.contains((Fraction(1), Fraction(-1), Fraction(0)))
    assert not full.contains((Fraction(1, 2), Fraction(-1, 2), Fraction(0)))


def test_unknown_lattice_kind(sl2):
    with pytest.raises(InputError):
        cochar_lattice(torus(sl2), "adjoint")


def test_coset_representatives_shift(sl2):
    T = torus(sl2)
    base = coset_representatives(T)
    moved = coset_representatives(T, (Fraction(2), Fraction(-2)))
    assert len(base) == len(moved) == lattice_index(T)
    assert moved != base
    with pytest.raises(InputError):
        coset_representatives(T, (Fraction(1, 2), Fraction(-1, 2)))


@pytest.mark.parametrize("xi,expected", [
    (("1/2", "-1/2"), True),
    (("1/3", "-1/3"), True),
    (("1", "-1"), False),
    (("0", "0"), False),
])
def test_general_position_in_sl2(sl2, xi, expected):
    assert is_general_position([Fraction(x) for x in xi], sl2) is expected


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_integral_points_are_never_general(a, b):
    g = make_group(3)
    assert not is_general_position((Fraction(a), Fraction(b), Fraction(-a - b)), g)
