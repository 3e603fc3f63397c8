"""
Exact convex hulls of small rational point sets.

The hull is described inside its own affine span: an affine frame, facet
inequalities in frame coordinates and a fan triangulation from the first
point. Dimensions up to 3 use closed-form normals; larger ones fall back to a
sympy null space.
"""

import itertools
import logging
import math
from fractions import Fraction
from typing import Callable, List, Sequence, Tuple

from ..core.exceptions import InputError
from . import linalg
from .linalg import Vector

logger = logging.getLogger(__name__)

Facet = Tuple[Tuple[Fraction, ...], Fraction, frozenset]


def _normal(diffs: List[List[Fraction]], k: int) -> Tuple[Fraction, ...]:
    """A vector orthogonal to k-1 difference vectors in Q^k (zero if they are dependent)."""
    if k == 2:
        (d,) = diffs
        return (-d[1], d[0])
    if k == 3:
        a, b = diffs
        return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
    basis = linalg.nullspace([tuple(d) for d in diffs], k)
    if len(basis) != 1:
        return tuple(Fraction(0) for _ in range(k))
    return basis[0]


class ConvexHull:
    """Convex hull of finitely many points of Q^n."""

    def __init__(self, points: Sequence[Vector]):
        pts = sorted(set(tuple(p) for p in points))
        if not pts:
            raise InputError("Convex hull of an empty set")
        self.points: Tuple[Vector, ...] = tuple(pts)
        self.n = len(pts[0])
        self.origin = pts[0]
        diffs = [linalg.sub(p, self.origin) for p in pts[1:]]
        picked = linalg.pivot_subset(diffs) if diffs else []
        self.frame = linalg.CoordinateFrame([diffs[i] for i in picked], self.n)
        self.dim = self.frame.k
        self.coords = [self.frame.coordinates(linalg.sub(p, self.origin)) for p in pts]
        self.facets: List[Facet] = self._facets()

    def _facets(self) -> List[Facet]:
        k = self.dim
        if k == 0:
            return []
        if k == 1:
            values = [c[0] for c in self.coords]
            lo, hi = min(values), max(values)
            return [
                ((Fraction(-1),), -lo, frozenset(i for i, x in enumerate(values) if x == lo)),
                ((Fraction(1),), hi, frozenset(i for i, x in enumerate(values) if x == hi)),
            ]
        found = {}
        for subset in itertools.combinations(range(len(self.coords)), k):
            base = self.coords[subset[0]]
            diffs = [[a - b for a, b in zip(self.coords[i], base)] for i in subset[1:]]
            normal = _normal(diffs, k)
            if all(x == 0 for x in normal):
                continue
            offset = sum((a * b for a, b in zip(normal, base)), Fraction(0))
            values = [sum((a * b for a, b in zip(normal, c)), Fraction(0)) for c in self.coords]
            if all(v <= offset for v in values):
                pass
            elif all(v >= offset for v in values):
                normal, offset = tuple(-x for x in normal), -offset
                values = [-v for v in values]
            else:
                continue
            on = frozenset(i for i, v in enumerate(values) if v == offset)
            # a facet carries an affinely (k-1)-dimensional vertex set
            if on not in found and ConvexHull._affine_dim([self.coords[i] for i in on]) == k - 1:
                found[on] = (normal, offset, on)
        return sorted(found.values(), key=lambda f: sorted(f[2]))

    @staticmethod
    def _affine_dim(coords: List[List[Fraction]]) -> int:
        base = coords[0]
        return linalg.rank([tuple(a - b for a, b in zip(c, base)) for c in coords[1:]])

    def contains(self, v: Vector) -> bool:
        c = self.frame.coordinates(linalg.sub(tuple(v), self.origin))
        if c is None:
            return False
        return all(sum((a * b for a, b in zip(normal, c)), Fraction(0)) <= offset
                   for normal, offset, _ in self.facets)

    def simplices(self) -> List[Tuple[Vector, ...]]:
        """Fan triangulation from the first point over the facets avoiding it."""
        if self.dim == 0:
            return [(self.points[0],)]
        if self.dim == 1:
            values = [c[0] for c in self.coords]
            lo = self.points[values.index(min(values))]
            hi = self.points[values.index(max(values))]
            return [(lo, hi)]
        out = []
        for _, _, on in self.facets:
            if 0 in on:
                continue
            face = ConvexHull([self.points[i] for i in on])
            for s in face.simplices():
                out.append((self.points[0],) + s)
        return out

    def volume(self, chart: Callable[[Vector], Sequence[Fraction]], r: int) -> Fraction:
        """r-dimensional volume in the coordinates given by chart (zero if the hull is flatter)."""
        if self.dim > r:
            raise InputError(f"Hull of dimension {self.dim} does not fit in {r} coordinates")
        if self.dim < r:
            return Fraction(0)
        if r == 0:
            return Fraction(1)
        total = Fraction(0)
        for s in self.simplices():
            base = chart(s[0])
            rows = [tuple(a - b for a, b in zip(chart(p), base)) for p in s[1:]]
            total += abs(linalg.det(rows))
        return total / math.factorial(r)

    def bounding_box(self, chart: Callable[[Vector], Sequence[Fraction]]) -> List[Tuple[Fraction, Fraction]]:
        images = [list(chart(p)) for p in self.points]
        return [(min(col), max(col)) for col in zip(*images)] if images and images[0] else []

    def stats(self) -> dict:
        return {"points": len(self.points), "dim": self.dim, "facets": len(self.facets)}
