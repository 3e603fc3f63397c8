"""
Positive orthogonal families from Iwasawa heights

Y_P = -H_P(g) is positive orthogonal for every g, so random valid families come
from random matrices:
- H_B(g) from valuations of bottom-row minors (no explicit factorization)
- any Borel through a permutation of the standard one
- p-adic heights of rational matrices; the same code runs over F_q(t) places
"""

import itertools
import logging
import math
import random
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

from sympy import multiplicity

from ..core.exceptions import InputError
from . import linalg
from .linalg import Vector
from .polytope import PositiveOrthogonalFamily
from .rootdata import GroupData, Levi, Parabolic, enumerate_levis, p_of, project

logger = logging.getLogger(__name__)

Valuation = Callable[[object], float]

PRIMES = (2, 3, 5)


def padic_valuation(p: int) -> Valuation:
    """v_p on Q, with v_p(0) = inf."""

    def val(x) -> float:
        x = Fraction(x)
        if x == 0:
            return math.inf
        return int(multiplicity(p, abs(x.numerator))) - int(multiplicity(p, x.denominator))

    return val


def det(rows: Sequence[Sequence]):
    """Laplace expansion; works for any ring elements with + - *."""
    if len(rows) == 1:
        return rows[0][0]
    total = None
    for j, entry in enumerate(rows[0]):
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        term = entry * det(minor)
        if total is None:
            total = term
        elif j % 2:
            total = total - term
        else:
            total = total + term
    return total


def _bottom_minor_valuation(g: List[list], j: int, val: Valuation) -> float:
    n = len(g)
    rows = [list(r) for r in g[n - j:]]
    return min(val(det([[r[c] for c in cols] for r in rows]))
               for cols in itertools.combinations(range(n), j))


def iwasawa_height(g: Sequence[Sequence], order: Sequence[int], val: Valuation, degree: int = 1) -> Vector:
    """
    H_B(g) for the Borel upper-triangular in the given index order.

    With g = n t k, the bottom j rows of g have minors of minimal valuation
    sum_{i > n-j} val(t_i); H_B has coordinates -deg * val(t_i), projected to
    trace zero.
    """
    n = len(g)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise InputError(f"Order {order} is not a permutation of 0..{n - 1}")
    permuted = [[g[order[a]][order[b]] for b in range(n)] for a in range(n)]
    sums = [0]
    for j in range(1, n + 1):
        v = _bottom_minor_valuation(permuted, j, val)
        if v == math.inf:
            raise InputError("Matrix is singular")
        sums.append(v)
    heights = [Fraction(0)] * n
    for a in range(n):
        # t'_a sits at depth n - a from the bottom
        depth = n - a
        heights[order[a]] = Fraction(-degree * (sums[depth] - sums[depth - 1]))
    mean = sum(heights) / n
    return tuple(h - mean for h in heights)


def borel_order(P: Parabolic) -> List[int]:
    """An index order whose Borel sits inside P."""
    return [i for block in P.order for i in block]


def family_from_matrix(group: GroupData, levi: Levi, g: Sequence[Sequence], val: Valuation,
                       degree: int = 1) -> PositiveOrthogonalFamily:
    points = {}
    for P in p_of(levi):
        h_b = iwasawa_height(g, borel_order(P), val, degree)
        points[P] = linalg.neg(project(h_b, P))
    return PositiveOrthogonalFamily.build(group, levi, points)


# ========================
# Random families
# ========================

def random_matrix(n: int, p: int, rng: random.Random) -> List[List[Fraction]]:
    while True:
        g = [[Fraction(rng.randint(-6, 6) * p ** rng.randint(0, 1), p ** rng.randint(0, 1))
              for _ in range(n)] for _ in range(n)]
        if det(g) != 0:
            return g


def random_family(group: GroupData, levi: Levi, rng: random.Random, integral: bool = False,
                  translate: Optional[Vector] = None) -> PositiveOrthogonalFamily:
    """
    Heights of a random p-adic matrix, positively rescaled and translated.

    integral=True keeps every adjacency coefficient an integer (integer scale).
    """
    p = rng.choice(PRIMES)
    f = family_from_matrix(group, levi, random_matrix(group.n, p, rng), padic_valuation(p))
    if integral:
        f = f.scaled(rng.randint(1, 2))
    else:
        f = f.scaled(Fraction(rng.randint(1, 6), rng.randint(1, 4)))
    if translate is None:
        translate = group.to_ambient([Fraction(rng.randint(-8, 8), rng.randint(1, 4)) for _ in range(group.n)])
    f = f.translate(translate)
    if rng.random() < 0.25:
        q = rng.choice(PRIMES)
        other = family_from_matrix(group, levi, random_matrix(group.n, q, rng), padic_valuation(q))
        f = f.minkowski(other)
    logger.debug(f"Random family over {levi}: {f.to_json()['points']}")
    return f


def random_levi(group: GroupData, rng: random.Random) -> Levi:
    return rng.choice(enumerate_levis(group))


def random_point(group: GroupData, rng: random.Random, spread: int = 8, den: int = 6) -> Vector:
    return group.to_ambient([Fraction(rng.randint(-spread * den, spread * den), den) for _ in range(group.n)])
