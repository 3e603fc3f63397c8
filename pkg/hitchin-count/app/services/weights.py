"""
Arthur weights and (G,M)-family calculus

Weights of a positive orthogonal family, each computed two ways:
- w_M^xi: lattice points of xi_M + X_*(M) in the hull (direct count, or the
  limit of a (G,M)-family sum)
- v_M: lattice-normalized volume of the hull (triangulation, or the limit)

Limits at Lambda = 0 are evaluated along Lambda = t * Lambda0 as truncated
Laurent series: the principal part must vanish and the constant term must not
depend on Lambda0. Both are asserted.
"""

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from ..core.config import settings
from ..core.exceptions import ConsistencyError, FamilyError, InputError
from . import linalg
from .linalg import Vector
from .polytope import PositiveOrthogonalFamily, check_generic, family_hull, family_point_for, trivial_family
from .rootdata import (
    Levi,
    Parabolic,
    adjacent_wall,
    cochar_lattice,
    coordinates_in,
    coset_representatives,
    make_group,
    p_of,
    project,
    root_bases,
)
from .series import LatticeKey, NormalizedScalar, SeriesQ, bernoulli, exp_linear, expm1_linear, scalar_sum

logger = logging.getLogger(__name__)

Member = Callable[[Parabolic, Vector, int], SeriesQ]


# ========================
# Building blocks
# ========================

def floor_decompose(mu: Vector, P: Parabolic) -> Tuple[Vector, Vector]:
    """mu = [mu]_P + {mu}_P in the basis of coroots of P, fractional coordinates in [0, 1)."""
    mu = tuple(mu)
    if sum(mu) != 0 or project(mu, P) != mu:
        raise InputError(f"Vector {mu} is not in a_{P}")
    coroots = root_bases(P).coroots
    coords = coordinates_in(P, mu)
    floors = [Fraction(math.floor(c)) for c in coords]
    integral = linalg.combination(floors, coroots, P.n)
    fractional = linalg.combination([c - f for c, f in zip(coords, floors)], coroots, P.n)
    return integral, fractional


def _coroot_values(P: Parabolic, lam0: Vector) -> List[Fraction]:
    return [linalg.dot(lam0, c) for c in root_bases(P).coroots]


def cP_series(P: Parabolic, lam0: Vector, order: int) -> SeriesQ:
    """c_P(t Lambda0) = prod (exp(t Lambda0(alpha^vee)) - 1)."""
    out = SeriesQ.constant(1)
    for a in _coroot_values(P, lam0):
        if a == 0:
            raise InputError(f"Direction {lam0} is not generic for {P}")
        out = out * expm1_linear(a, order + 1)
    return out.truncate(order)


def dP_series(P: Parabolic, lam0: Vector, order: int) -> Tuple[SeriesQ, NormalizedScalar]:
    """d_P(t Lambda0) as (prod t Lambda0(alpha^vee), covol(X_*(M_scnx))^-1)."""
    values = _coroot_values(P, lam0)
    if any(a == 0 for a in values):
        raise InputError(f"Direction {lam0} is not generic for {P}")
    product = math.prod(values, start=Fraction(1))
    return SeriesQ.monomial(product, len(values)), NormalizedScalar.of(1, {("scnx", P.levi): -1})


def _bernoulli_factor(P: Parabolic, lam0: Vector, order: int) -> SeriesQ:
    """prod B(t Lambda0(alpha^vee)), B(z) = z/(e^z - 1); a zero value contributes B(0) = 1."""
    out = SeriesQ.constant(1)
    for a in _coroot_values(P, lam0):
        if a != 0:
            out = out * bernoulli(order).rescale(a)
    return out.truncate(order)


def rho_P(P: Parabolic) -> Vector:
    return linalg.combination([1] * len(root_bases(P).coroots), root_bases(P).coroots, P.n)


# ========================
# (G,M)-families
# ========================

@dataclass
class GMFamily:
    """
    member(P, Lambda0, order) is b_P(t Lambda0) to precision order; the
    limit is multiplied by the covolume monomial in factors.
    """

    levi: Levi
    member: Member
    factors: Dict[LatticeKey, int] = field(default_factory=dict)
    label: str = ""


def generic_directions(levi: Levi, count: int, rng: random.Random) -> List[Vector]:
    """Integer covectors on a_L taking distinct values on the blocks of L."""
    n = levi.n
    out = []
    for _ in range(count):
        values = rng.sample(range(-9, 10), len(levi.blocks))
        v = [Fraction(0)] * n
        for block, c in zip(levi.blocks, values):
            for i in block:
                v[i] = Fraction(c)
        mean = sum(v) / n
        lam0 = tuple(x - mean for x in v)
        check_generic(levi, lam0)
        out.append(lam0)
    return out


def default_directions(levi: Levi) -> List[Vector]:
    return generic_directions(levi, settings.DIRECTIONS, random.Random(settings.SEED))


def family_limit(fam: GMFamily, directions: Optional[Sequence[Vector]] = None) -> NormalizedScalar:
    """b_M(0) = lim sum_P d_P(Lambda)^-1 b_P(Lambda), checked along every direction."""
    levi = fam.levi
    if directions is None:
        directions = default_directions(levi)
    if not directions:
        raise InputError("family_limit needs at least one direction")
    k = levi.rank
    order = k + 1 + settings.SERIES_PAD
    values = []
    for lam0 in directions:
        lam0 = tuple(lam0)
        if project(lam0, levi) != lam0:
            raise InputError(f"Direction {lam0} is not a covector on a_{levi}")
        check_generic(levi, lam0)
        total = SeriesQ({}, math.inf)
        for P in p_of(levi):
            theta, _ = dP_series(P, lam0, order)
            total = total + fam.member(P, lam0, order) * theta.inverse()
        for d in range(-k, 0):
            if total.coefficient(d) != 0:
                raise ConsistencyError(
                    f"{fam.label or 'family'} over {levi}: principal part {total.principal_part()} "
                    f"along {lam0}")
        values.append(total.coefficient(0))
    if len(set(values)) != 1:
        raise ConsistencyError(f"{fam.label or 'family'} over {levi}: limit depends on direction {values}")
    factors = dict(fam.factors)
    factors[("scnx", levi)] = factors.get(("scnx", levi), 0) + 1
    return NormalizedScalar.of(values[0], factors)


def v_family(f: PositiveOrthogonalFamily) -> GMFamily:
    """v_P(Lambda) = exp(Lambda(Y_P))."""

    def member(P: Parabolic, lam0: Vector, order: int) -> SeriesQ:
        return exp_linear(linalg.dot(lam0, f.point(P)), order)

    return GMFamily(f.levi, member, {}, "v")


def w_family(mu: Vector, levi: Levi, anchors: Optional[Dict[Parabolic, Vector]] = None) -> GMFamily:
    """
    w_P(mu, Lambda) = d_P/c_P * exp(Lambda(rho_P - {a_P - mu}_P)), anchors a_P default to 0.

    Anchoring at the family points Y_P makes v * w count the points of
    mu + X_*(M_scnx) in the hull, whether or not the Y_P are congruent.
    """
    mu = tuple(mu)
    if project(mu, levi) != mu:
        raise InputError(f"Vector {mu} is not in a_{levi}")
    anchors = anchors or {}

    def member(P: Parabolic, lam0: Vector, order: int) -> SeriesQ:
        anchor = anchors.get(P)
        _, frac = floor_decompose(linalg.sub(anchor, mu) if anchor is not None else linalg.neg(mu), P)
        shift = linalg.sub(rho_P(P), frac)
        return (_bernoulli_factor(P, lam0, order) * exp_linear(linalg.dot(lam0, shift), order)).truncate(order)

    return GMFamily(levi, member, {("scnx", levi): -1}, "w")


def brion_family(f: PositiveOrthogonalFamily, eta: Vector) -> GMFamily:
    """
    d_P/c_P * exp(Lambda(x_P + rho_P)) with x_P = Y_P - {Y_P - eta}_P.

    Its limit counts the points of eta + X_*(M_scnx) in the hull of f.
    """
    eta = tuple(eta)

    def member(P: Parabolic, lam0: Vector, order: int) -> SeriesQ:
        y = f.point(P)
        _, frac = floor_decompose(linalg.sub(y, eta), P)
        apex = linalg.add(linalg.sub(y, frac), rho_P(P))
        return (_bernoulli_factor(P, lam0, order) * exp_linear(linalg.dot(lam0, apex), order)).truncate(order)

    return GMFamily(f.levi, member, {("scnx", f.levi): -1}, "brion")


def product_family(a: GMFamily, b: GMFamily) -> GMFamily:
    if a.levi != b.levi:
        raise InputError("Product of families over different Levis")

    def member(P: Parabolic, lam0: Vector, order: int) -> SeriesQ:
        return (a.member(P, lam0, order) * b.member(P, lam0, order)).truncate(order)

    factors = dict(a.factors)
    for key, e in b.factors.items():
        factors[key] = factors.get(key, 0) + e
    return GMFamily(a.levi, member, factors, f"{a.label}*{b.label}")


def restrict_family(fam: Union[GMFamily, PositiveOrthogonalFamily], L: Levi):
    """Restriction to L containing M: members of Q in P(L) read off any P in P(M) inside Q."""
    levi = fam.levi
    if not levi.refines(L):
        raise InputError(f"{L} does not contain {levi}")
    if isinstance(fam, PositiveOrthogonalFamily):
        points = {Q: project(family_point_for(fam, Q), L) for Q in p_of(L)}
        return PositiveOrthogonalFamily.build(fam.group, L, points)

    def member(Q: Parabolic, lam0: Vector, order: int) -> SeriesQ:
        choices = [fam.member(P, lam0, order) for P in p_of(levi) if Q.contains(P)]
        if not choices:
            raise InputError(f"No parabolic of P({levi}) inside {Q}")
        if any(c != choices[0] for c in choices[1:]):
            raise FamilyError(f"Restriction of {fam.label} to {Q} depends on the choice of P")
        return choices[0]

    return GMFamily(L, member, dict(fam.factors), f"{fam.label}|{L}")


def recollement_check(fam: GMFamily, rng: random.Random, order: int = 4) -> int:
    """Adjacent members agree on their common wall; returns the number of walls tested."""
    levi = fam.levi
    parabolics = list(p_of(levi))
    tested = 0
    for P, P2 in itertools.combinations(parabolics, 2):
        i = adjacent_wall(P, P2)
        if i is None:
            continue
        values = {b: Fraction(rng.randint(-9, 9)) for b in levi.blocks}
        values[P.order[i + 1]] = values[P.order[i]]
        v = [Fraction(0)] * levi.n
        for block, c in values.items():
            for i in block:
                v[i] = c
        mean = sum(v) / levi.n
        lam0 = tuple(x - mean for x in v)
        if fam.member(P, lam0, order) != fam.member(P2, lam0, order):
            raise ConsistencyError(f"{fam.label}: members of {P} and {P2} disagree on their wall")
        tested += 1
    return tested


# ========================
# Weights
# ========================

def _as_count(value: NormalizedScalar, what: str) -> int:
    x = value.rational()
    if x.denominator != 1 or x < 0:
        raise ConsistencyError(f"{what} returned {x}, not a nonnegative integer")
    return int(x)


def lattice_points(f: PositiveOrthogonalFamily, xi: Vector) -> List[Vector]:
    """Points of xi_M + X_*(M) in the hull, by scanning a box in lattice coordinates."""
    levi = f.levi
    xi_m = project(f.group.check(xi), levi)
    lattice = cochar_lattice(levi, "full")
    hull = family_hull(f)

    def chart(v: Vector) -> List[Fraction]:
        coords = lattice.coordinates(linalg.sub(v, xi_m))
        if coords is None:
            raise ConsistencyError(f"Hull point {v} left a_{levi}")
        return coords

    box = hull.bounding_box(chart)
    ranges = [range(math.ceil(lo), math.floor(hi) + 1) for lo, hi in box]
    found = []
    for ks in itertools.product(*ranges):
        v = linalg.add(xi_m, linalg.combination(ks, lattice.basis, levi.n))
        if hull.contains(v):
            found.append(v)
    return found


def product_limit_sum(f: PositiveOrthogonalFamily, xi: Vector,
                      directions: Optional[Sequence[Vector]] = None,
                      shift: Optional[Vector] = None) -> NormalizedScalar:
    """sum over mu0 in X_*(M)/X_*(M_scnx) of (v * w)_M(mu0 + xi_M) at Lambda = 0."""
    levi = f.levi
    xi_m = project(f.group.check(xi), levi)
    anchors = dict(f.entries)
    v = v_family(f)
    return scalar_sum(
        family_limit(product_family(v, w_family(linalg.add(mu0, xi_m), levi, anchors)), directions)
        for mu0 in coset_representatives(levi, shift)
    )


def w_weight(f: PositiveOrthogonalFamily, xi: Vector, method: str = "direct",
             directions: Optional[Sequence[Vector]] = None) -> int:
    """
    Points of xi_M + X_*(M) in the hull: direct scan, limit of the product
    family v * w, or the limit of the Brion family (vertex cones).
    """
    if method == "direct":
        return len(lattice_points(f, xi))
    if method == "limit":
        return _as_count(product_limit_sum(f, xi, directions), "w_weight(limit)")
    if method != "brion":
        raise InputError(f"Unknown method {method!r}")
    xi_m = project(f.group.check(xi), f.levi)
    total = scalar_sum(
        family_limit(brion_family(f, linalg.add(mu0, xi_m)), directions)
        for mu0 in coset_representatives(f.levi)
    )
    return _as_count(total, "w_weight(brion)")


def v_weight(f: PositiveOrthogonalFamily, method: str = "direct",
             directions: Optional[Sequence[Vector]] = None) -> NormalizedScalar:
    levi = f.levi
    if method == "limit":
        return family_limit(v_family(f), directions)
    if method != "direct":
        raise InputError(f"Unknown method {method!r}")
    p0 = p_of(levi)[0]
    volume = family_hull(f).volume(lambda v: coordinates_in(p0, v), levi.rank)
    return NormalizedScalar.of(volume, {("scnx", levi): 1})


def reformulation_check(f: PositiveOrthogonalFamily, xi: Vector,
                        directions: Optional[Sequence[Vector]] = None,
                        shift: Optional[Vector] = None) -> Tuple[int, int]:
    """sum over cosets of (v*w)_M(mu0 + xi_M) at Lambda = 0 against the direct count."""
    lhs = _as_count(product_limit_sum(f, xi, directions, shift), "reformulation")
    rhs = w_weight(f, xi, "direct")
    return lhs, rhs


def wl_sum_identity(levi: Levi, L: Levi, xi: Vector,
                    directions: Optional[Sequence[Vector]] = None,
                    shift: Optional[Vector] = None) -> Tuple[NormalizedScalar, NormalizedScalar]:
    """
    sum_{mu0} w_L(mu0 + xi_M) against [covol X_*(L) / covol X_*(M)] * w_L^xi(1).

    Both sides are returned as normalized scalars for the caller to compare.
    """
    group = make_group(levi.n)
    xi = group.check(xi)
    xi_m = project(xi, levi)
    lhs = scalar_sum(
        family_limit(restrict_family(w_family(linalg.add(mu0, xi_m), levi), L), directions)
        for mu0 in coset_representatives(levi, shift)
    )
    count = w_weight(trivial_family(group, L), xi, "direct")
    rhs = NormalizedScalar.of(count, {("full", L): 1, ("full", levi): -1})
    return lhs, rhs


def weights_report(f: PositiveOrthogonalFamily, xi: Vector) -> dict:
    directions = default_directions(f.levi)
    w_direct = w_weight(f, xi, "direct")
    w_limit = w_weight(f, xi, "limit", directions)
    w_brion = w_weight(f, xi, "brion", directions)
    v_direct = v_weight(f, "direct")
    v_limit = v_weight(f, "limit", directions)
    if w_direct != w_limit:
        raise ConsistencyError(f"w_weight direct={w_direct} limit={w_limit}")
    if w_brion != w_limit:
        raise ConsistencyError(f"w_weight limit={w_limit} brion={w_brion}")
    if v_direct != v_limit:
        raise ConsistencyError(f"v_weight direct={v_direct} limit={v_limit}")
    v = v_direct.normalized()
    return {
        "w_direct": w_direct,
        "w_limit": w_limit,
        "v_direct": linalg.format_rational(v.value),
        "v_limit": linalg.format_rational(v_limit.normalized().value),
        "reference_lattice": v.reference(),
        "directions_tested": len(directions),
    }
