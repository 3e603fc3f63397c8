"""
Stability polytopes

Positive orthogonal families (Y_P) over P(M) and what they cut out in a_T:
- validation of positivity along adjacent parabolics
- the cones anchored at the family points (open, closed, acute)
- xi-(semi)stability and convex-hull membership
- the xi-Harder-Narasimhan point by finite search over F(M)
- the Langlands alternating sum and the chamber partition of a_T
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, List, Mapping, Sequence, Tuple

from ..core.exceptions import ConsistencyError, FamilyError, InputError
from . import linalg
from .hull import ConvexHull
from .linalg import Vector
from .rootdata import (
    GroupData,
    Levi,
    Parabolic,
    adjacency_coroot,
    f_of,
    maximal_parabolics,
    p_of,
    project,
    root_bases,
    torus,
)

logger = logging.getLogger(__name__)

CONE_KINDS = ("obtuse_open", "obtuse_closed", "acute")
CM_MODES = ("all_F", "only_P", "only_maximal")


# ========================
# Families
# ========================

@dataclass(frozen=True)
class PositiveOrthogonalFamily:
    """Points Y_P for P in P(M), normalized into a_M."""

    group: GroupData
    levi: Levi
    entries: Tuple[Tuple[Parabolic, Vector], ...]

    @classmethod
    def build(cls, group: GroupData, levi: Levi, points: Mapping[Parabolic, Sequence]) -> "PositiveOrthogonalFamily":
        if levi.n != group.n:
            raise InputError(f"Levi {levi} does not live in SL({group.n})")
        expected = set(p_of(levi))
        if set(points) != expected:
            missing = sorted(p.key for p in expected - set(points))
            extra = sorted(p.key for p in set(points) - expected)
            raise FamilyError(f"Family must be indexed by P(M); missing={missing} extra={extra}")
        entries = tuple(
            (P, project(group.check(points[P]), levi))
            for P in sorted(points, key=lambda p: p.key)
        )
        return cls(group, levi, entries)

    @cached_property
    def points(self) -> Dict[Parabolic, Vector]:
        return dict(self.entries)

    def point(self, P: Parabolic) -> Vector:
        return self.points[P]

    @property
    def parabolics(self) -> List[Parabolic]:
        return [P for P, _ in self.entries]

    def translate(self, v: Vector) -> "PositiveOrthogonalFamily":
        v = project(self.group.check(v), self.levi)
        return PositiveOrthogonalFamily.build(
            self.group, self.levi, {P: linalg.add(Y, v) for P, Y in self.entries})

    def scaled(self, c) -> "PositiveOrthogonalFamily":
        if Fraction(c) < 0:
            raise FamilyError("Only nonnegative scalings preserve positivity")
        return PositiveOrthogonalFamily.build(
            self.group, self.levi, {P: linalg.scale(c, Y) for P, Y in self.entries})

    def minkowski(self, other: "PositiveOrthogonalFamily") -> "PositiveOrthogonalFamily":
        if other.levi != self.levi:
            raise InputError("Minkowski sum needs families over the same Levi")
        return PositiveOrthogonalFamily.build(
            self.group, self.levi, {P: linalg.add(Y, other.point(P)) for P, Y in self.entries})

    def to_json(self) -> dict:
        return {
            "group": {"n": self.group.n},
            "levi": self.levi.to_json(),
            "points": {P.key: [linalg.format_rational(x) for x in Y] for P, Y in self.entries},
        }


def trivial_family(group: GroupData, levi: Levi) -> PositiveOrthogonalFamily:
    return PositiveOrthogonalFamily.build(group, levi, {P: linalg.zero(group.n) for P in p_of(levi)})


def validate_family(f: PositiveOrthogonalFamily) -> Dict[Tuple[Parabolic, Parabolic], Fraction]:
    """x_alpha with Y_P - Y_P' = x_alpha * alpha^vee for every ordered adjacent pair."""
    out = {}
    for P in f.parabolics:
        for P2 in f.parabolics:
            if P == P2:
                continue
            coroot = adjacency_coroot(P, P2)
            if coroot is None:
                continue
            diff = linalg.sub(f.point(P), f.point(P2))
            i = next(j for j, c in enumerate(coroot) if c != 0)
            x = diff[i] / coroot[i]
            if linalg.scale(x, coroot) != diff:
                raise FamilyError(f"Y_{P} - Y_{P2} is not a multiple of the adjacency coroot")
            if x < 0:
                raise FamilyError(f"Negative coefficient {x} between {P} and {P2}")
            out[(P, P2)] = x
    return out


def family_point_for(f: PositiveOrthogonalFamily, Q: Parabolic) -> Vector:
    """Common a_Q-projection of Y_P over P in P(M) contained in Q."""
    if Q not in f_of(f.levi):
        raise InputError(f"{Q} is not in F({f.levi})")
    values = {project(f.point(P), Q) for P in f.parabolics if Q.contains(P)}
    if len(values) != 1:
        raise FamilyError(f"Projections onto a_{Q} disagree: {len(values)} values")
    return next(iter(values))


# ========================
# Cones and polytopes
# ========================

def cone_member(P: Parabolic, H: Vector, kind: str) -> bool:
    if kind not in CONE_KINDS:
        raise InputError(f"Unknown cone kind {kind!r}")
    if project(H, P) != tuple(H):
        raise InputError(f"Vector is not in a_{P}")
    bases = root_bases(P)
    if kind == "acute":
        return all(linalg.dot(a, H) > 0 for a in bases.roots)
    if kind == "obtuse_open":
        return all(linalg.dot(w, H) > 0 for w in bases.fundamental)
    return all(linalg.dot(w, H) >= 0 for w in bases.fundamental)


def _cm_index(f: PositiveOrthogonalFamily, mode: str) -> List[Parabolic]:
    if mode == "all_F":
        return list(f_of(f.levi))
    if mode == "only_P":
        return f.parabolics
    if mode == "only_maximal":
        return maximal_parabolics(f.levi)
    raise InputError(f"Unknown mode {mode!r}")


def cm_member(f: PositiveOrthogonalFamily, xi: Vector, closed: bool = False, mode: str = "only_P") -> bool:
    """xi in C_m (open) or its closure, intersecting the cylinders over the chosen index set."""
    xi = f.group.check(xi)
    for P in _cm_index(f, mode):
        d = linalg.sub(xi, family_point_for(f, P))
        for w in root_bases(P).fundamental:
            value = linalg.dot(w, d)
            if value > 0 or (value == 0 and not closed):
                return False
    return True


@lru_cache(maxsize=256)
def family_hull(f: PositiveOrthogonalFamily) -> ConvexHull:
    return ConvexHull([Y for _, Y in f.entries])


def hull_member(f: PositiveOrthogonalFamily, v: Vector) -> bool:
    v = f.group.check(v)
    return family_hull(f).contains(project(v, f.levi))


# ========================
# Harder-Narasimhan point
# ========================

@dataclass(frozen=True)
class HNResult:
    rho: Vector
    q: Parabolic
    dist2: Fraction

    def to_json(self) -> dict:
        return {
            "rho": [linalg.format_rational(x) for x in self.rho],
            "q": self.q.key,
            "dist2": linalg.format_rational(self.dist2),
        }


def hn_point(f: PositiveOrthogonalFamily, xi: Vector) -> HNResult:
    """Nearest point of the closed polytope to xi, found on the affine face it projects to."""
    xi = f.group.check(xi)
    successes = []
    for Q in f_of(f.levi):
        y_q = family_point_for(f, Q)
        rho = linalg.add(project(xi, Q, "onto_aTP"), y_q)
        gap = linalg.sub(project(xi, Q), y_q)
        if not cone_member(Q, gap, "acute"):
            continue
        if not cm_member(f, rho, closed=True, mode="only_P"):
            continue
        successes.append(HNResult(rho, Q, linalg.dot(gap, gap)))
    if len(successes) != 1:
        raise ConsistencyError(
            f"HN search found {len(successes)} candidates: {[s.q.key for s in successes]}")
    logger.debug(f"HN point for xi={xi}: Q={successes[0].q} dist2={successes[0].dist2}")
    return successes[0]


# ========================
# Langlands combinatorics
# ========================

def check_generic(levi: Levi, lam0: Vector) -> None:
    for P in p_of(levi):
        for c in root_bases(P).coroots:
            if linalg.dot(lam0, c) == 0:
                raise InputError(f"Direction {lam0} is not generic: vanishes on a coroot of {P}")


def langlands_indicator(f: PositiveOrthogonalFamily, mu: Vector, lam0: Vector) -> int:
    """Alternating sum of the sign-twisted cone indicators; the hull's characteristic function."""
    check_generic(f.levi, lam0)
    total = 0
    for P in f.parabolics:
        bases = root_bases(P)
        lam = linalg.sub(mu, f.point(P))
        flipped = [linalg.dot(lam0, c) < 0 for c in bases.coroots]
        inside = all(
            (linalg.dot(w, lam) > 0) if flip else (linalg.dot(w, lam) <= 0)
            for w, flip in zip(bases.fundamental, flipped)
        )
        if inside:
            total += -1 if sum(flipped) % 2 else 1
    if total not in (0, 1):
        raise ConsistencyError(f"Langlands sum returned {total}")
    return total


def chamber_partition_check(g: GroupData, v: Vector) -> Parabolic:
    """The unique P in F(T) with v in the acute chamber a_P^+."""
    v = g.check(v)
    matches = [
        P for P in f_of(torus(g))
        if project(v, P) == v and all(linalg.dot(a, v) > 0 for a in root_bases(P).roots)
    ]
    if len(matches) != 1:
        raise ConsistencyError(f"Chamber partition violated at {v}: {[P.key for P in matches]}")
    return matches[0]
