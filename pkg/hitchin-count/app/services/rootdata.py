"""
Type-A root data for SL(n)

Exact combinatorics of the ambient space a_T = {v in Q^n : sum(v) = 0}:
- Levis as set partitions, semi-standard parabolics as ordered set partitions
- simple roots, coroots and the dual basis of each parabolic
- block-average projections and cocharacter lattices
- covolume ratios as exact change-of-basis determinants

Indices are 0-based internally and 1-based in JSON.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from ..core.exceptions import InputError
from . import linalg
from .linalg import Vector

logger = logging.getLogger(__name__)

Block = Tuple[int, ...]


# ========================
# Group, Levi, Parabolic
# ========================

@dataclass(frozen=True)
class GroupData:
    """SL(n) with its trace-zero ambient space."""

    n: int

    @property
    def dim(self) -> int:
        return self.n - 1

    def check(self, v: Sequence) -> Vector:
        v = linalg.vec(v)
        if len(v) != self.n:
            raise InputError(f"Expected {self.n} coordinates, got {len(v)}")
        if sum(v) != 0:
            raise InputError(f"Vector {v} is not trace-zero")
        return v

    def to_ambient(self, values: Sequence) -> Vector:
        """Project a GL(n) vector to the trace-zero subspace."""
        v = linalg.vec(values)
        if len(v) != self.n:
            raise InputError(f"Expected {self.n} coordinates, got {len(v)}")
        mean = sum(v) / self.n
        return tuple(x - mean for x in v)


def make_group(n: int) -> GroupData:
    if not isinstance(n, int) or n < 2:
        raise InputError(f"SL(n) needs n >= 2, got {n!r}")
    return GroupData(n)


@dataclass(frozen=True)
class Levi:
    """Set partition of {0..n-1}; blocks sorted, ordered by smallest element."""

    blocks: Tuple[Block, ...]

    @classmethod
    def of(cls, blocks) -> "Levi":
        canon = sorted(tuple(sorted(b)) for b in blocks)
        seen = [i for b in canon for i in b]
        if any(not b for b in canon) or len(seen) != len(set(seen)):
            raise InputError(f"Blocks {blocks} are not a set partition")
        if sorted(seen) != list(range(len(seen))):
            raise InputError(f"Blocks {blocks} do not cover 0..{len(seen) - 1}")
        return cls(tuple(canon))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def rank(self) -> int:
        """dim a_M^G."""
        return len(self.blocks) - 1

    def refines(self, other: "Levi") -> bool:
        """True iff self is contained in other (every block inside one block)."""
        return all(any(set(b) <= set(c) for c in other.blocks) for b in self.blocks)

    def to_json(self) -> list:
        return [[i + 1 for i in b] for b in self.blocks]

    def __str__(self) -> str:
        return "{" + ",".join("{" + ",".join(str(i + 1) for i in b) + "}" for b in self.blocks) + "}"


@dataclass(frozen=True)
class Parabolic:
    """Ordered set partition: block upper-triangular subgroup for that order."""

    order: Tuple[Block, ...]

    @classmethod
    def of(cls, order) -> "Parabolic":
        order = tuple(tuple(sorted(b)) for b in order)
        Levi.of(order)
        return cls(order)

    @classmethod
    def from_key(cls, key: str) -> "Parabolic":
        try:
            order = [[int(i) - 1 for i in part.split(",")] for part in key.split("|")]
        except ValueError as e:
            raise InputError(f"Bad parabolic key {key!r}") from e
        return cls.of(order)

    @property
    def levi(self) -> Levi:
        return Levi.of(self.order)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.order)

    @property
    def key(self) -> str:
        return "|".join(",".join(str(i + 1) for i in b) for b in self.order)

    @property
    def is_whole(self) -> bool:
        return len(self.order) == 1

    def contains(self, other: "Parabolic") -> bool:
        """True iff other is a subgroup of self: self merges consecutive blocks of other."""
        pos = 0
        for block in self.order:
            acc = set()
            while pos < len(other.order) and acc != set(block):
                acc |= set(other.order[pos])
                pos += 1
            if acc != set(block):
                return False
        return pos == len(other.order)

    def to_json(self) -> list:
        return [[i + 1 for i in b] for b in self.order]

    def __str__(self) -> str:
        return self.key


def torus(g: GroupData) -> Levi:
    return Levi(tuple((i,) for i in range(g.n)))


def whole(g: GroupData) -> Levi:
    return Levi((tuple(range(g.n)),))


def whole_parabolic(n: int) -> Parabolic:
    return Parabolic((tuple(range(n)),))


# ========================
# Enumeration
# ========================

def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def enumerate_levis(g: GroupData) -> List[Levi]:
    levis = {Levi.of(p) for p in _set_partitions(list(range(g.n)))}
    return sorted(levis, key=lambda m: (len(m.blocks), m.blocks))


@lru_cache(maxsize=None)
def p_of(M: Levi) -> Tuple[Parabolic, ...]:
    """P(M): every ordering of the blocks of M."""
    return tuple(sorted((Parabolic(p) for p in itertools.permutations(M.blocks)), key=lambda p: p.key))


@lru_cache(maxsize=None)
def f_of(M: Levi) -> Tuple[Parabolic, ...]:
    """F(M): every ordered coarsening of the blocks of M."""
    out = set()
    for grouping in _set_partitions(list(range(len(M.blocks)))):
        merged = [tuple(sorted(i for j in grp for i in M.blocks[j])) for grp in grouping]
        for order in itertools.permutations(merged):
            out.add(Parabolic(order))
    return tuple(sorted(out, key=lambda p: (len(p.order), p.key)))


def parabolics_over(M: Levi, Q: Optional[Parabolic] = None) -> Tuple[List[Parabolic], List[Parabolic]]:
    """(P(M), F(M)), restricted to subgroups of Q when Q is given."""
    p_list, f_list = list(p_of(M)), list(f_of(M))
    if Q is None:
        return p_list, f_list
    if Q.n != M.n or not M.refines(Q.levi):
        raise InputError(f"Parabolic {Q} does not contain Levi {M}")
    return [P for P in p_list if Q.contains(P)], [P for P in f_list if Q.contains(P)]


def maximal_parabolics(M: Levi) -> List[Parabolic]:
    return [P for P in f_of(M) if len(P.order) == 2]


# ========================
# Root bases and projections
# ========================

@dataclass(frozen=True)
class RootBases:
    """
    Covectors are stored as their trace-zero coefficient vectors, so that
    evaluation is the dot product.
    """

    roots: Tuple[Vector, ...]
    coroots: Tuple[Vector, ...]
    fundamental: Tuple[Vector, ...]


@lru_cache(maxsize=None)
def root_bases(P: Parabolic) -> RootBases:
    n = P.n
    coroots = []
    fundamental = []
    prefix = set()
    for i in range(len(P.order) - 1):
        left, right = P.order[i], P.order[i + 1]
        v = [Fraction(0)] * n
        for a in left:
            v[a] = Fraction(1, len(left))
        for b in right:
            v[b] = Fraction(-1, len(right))
        coroots.append(tuple(v))
        prefix |= set(left)
        share = Fraction(len(prefix), n)
        fundamental.append(tuple((1 if a in prefix else 0) - share for a in range(n)))
    # the restriction of the simple root to a_P is <coroot, .>
    return RootBases(tuple(coroots), tuple(coroots), tuple(fundamental))


def project(v: Vector, P, part: str = "onto_aP") -> Vector:
    """Orthogonal decomposition v = v^P + v_P; v_P is the block average over P's Levi."""
    blocks = P.order if isinstance(P, Parabolic) else P.blocks
    out = list(v)
    for b in blocks:
        mean = sum((v[i] for i in b), Fraction(0)) / len(b)
        for i in b:
            out[i] = mean
    v_p = tuple(out)
    if part == "onto_aP":
        return v_p
    if part == "onto_aTP":
        return linalg.sub(v, v_p)
    raise InputError(f"Unknown projection part {part!r}")


def adjacent_wall(P: Parabolic, P2: Parabolic) -> Optional[int]:
    """Index i such that P2 is P with blocks i and i+1 swapped, if any."""
    if P.levi != P2.levi:
        raise InputError(f"{P} and {P2} have different Levis")
    diff = [i for i in range(len(P.order)) if P.order[i] != P2.order[i]]
    if len(diff) != 2 or diff[1] != diff[0] + 1:
        return None
    i = diff[0]
    if P.order[i] != P2.order[i + 1] or P.order[i + 1] != P2.order[i]:
        return None
    return i


def adjacency_coroot(P: Parabolic, P2: Parabolic) -> Optional[Vector]:
    """The coroot alpha^vee of P whose wall P and P2 share (P2 has -alpha^vee), or None."""
    i = adjacent_wall(P, P2)
    if i is None:
        return None
    return root_bases(P).coroots[i]


def coordinates_in(P: Parabolic, v: Vector) -> List[Fraction]:
    """Coordinates of v_P in the basis of coroots of P (dual basis evaluation)."""
    return [linalg.dot(w, v) for w in root_bases(P).fundamental]


# ========================
# Lattices
# ========================

@dataclass(frozen=True)
class LatticeQ:
    """Full-rank lattice in the subspace spanned by its basis."""

    basis: Tuple[Vector, ...]
    n: int

    def __post_init__(self):
        if linalg.rank(self.basis) != len(self.basis):
            raise InputError("Lattice basis is not linearly independent")

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Vector) -> Optional[List[Fraction]]:
        return _frame(self).coordinates(v)

    def contains(self, v: Vector) -> bool:
        coords = self.coordinates(v)
        return coords is not None and all(c.denominator == 1 for c in coords)

    def same_span(self, other: "LatticeQ") -> bool:
        if self.rank != other.rank or self.n != other.n:
            return False
        return all(other.coordinates(b) is not None for b in self.basis)


@lru_cache(maxsize=None)
def _frame(lattice: LatticeQ) -> linalg.CoordinateFrame:
    return linalg.CoordinateFrame(lattice.basis, lattice.n)


@lru_cache(maxsize=None)
def cochar_lattice(M: Levi, kind: str = "full") -> LatticeQ:
    """X_*(M) (image of X_*(T) under block averaging) or X_*(M_scnx) (coroot span)."""
    n = M.n
    p0 = Parabolic(M.blocks)
    if kind == "scnx":
        return LatticeQ(root_bases(p0).coroots, n)
    if kind != "full":
        raise InputError(f"Unknown lattice kind {kind!r}")
    gens = []
    for i in range(n - 1):
        e = [Fraction(0)] * n
        e[i], e[i + 1] = Fraction(1), Fraction(-1)
        gens.append(project(tuple(e), M))
    return LatticeQ(tuple(linalg.hnf_basis(gens, n)), n)


def covolume_ratio(A: LatticeQ, B: LatticeQ) -> Fraction:
    """covol(A)/covol(B) = |det| of the change of basis, for lattices with the same span."""
    if not A.same_span(B):
        raise InputError("Lattices span different subspaces")
    rows = [tuple(B.coordinates(a)) for a in A.basis]
    return abs(linalg.det(rows))


def lattice_index(M: Levi) -> int:
    """[X_*(M) : X_*(M_scnx)] from the Smith invariants of the inclusion."""
    full, scnx = cochar_lattice(M, "full"), cochar_lattice(M, "scnx")
    rows = [[int(c) for c in full.coordinates(s)] for s in scnx.basis]
    index = 1
    for d in linalg.smith_invariants(rows):
        index *= d
    return index


def coset_representatives(M: Levi, shift: Optional[Vector] = None) -> List[Vector]:
    """Representatives of X_*(M)/X_*(M_scnx), optionally moved by an element of X_*(M_scnx)."""
    full, scnx = cochar_lattice(M, "full"), cochar_lattice(M, "scnx")
    index = lattice_index(M)
    reps: List[Vector] = []
    for coeffs in itertools.product(range(index), repeat=full.rank):
        cand = linalg.combination(coeffs, full.basis, M.n)
        if all(not scnx.contains(linalg.sub(cand, r)) for r in reps):
            reps.append(cand)
        if len(reps) == index:
            break
    if shift is not None:
        if not scnx.contains(shift):
            raise InputError("Representative shift must lie in X_*(M_scnx)")
        reps = [linalg.add(r, shift) for r in reps]
    return reps


def is_general_position(xi: Vector, g: GroupData) -> bool:
    """xi_P avoids X_*(M_P) for every proper P; two-block parabolics suffice."""
    xi = g.check(xi)
    for P in maximal_parabolics(torus(g)):
        if cochar_lattice(P.levi, "full").contains(project(xi, P)):
            return False
    return True
