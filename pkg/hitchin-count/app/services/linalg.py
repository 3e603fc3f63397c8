"""
Exact rational linear algebra

Vectors are tuples of Fraction. Anything that needs elimination or a normal
form goes through sympy:
- Matrix for rank, solving, determinants and null spaces
- hermite_normal_form for lattice bases
- smith_normal_form for lattice indices
"""

import math
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from sympy import Matrix, Rational
from sympy.matrices.normalforms import hermite_normal_form, smith_normal_form
from sympy.polys.domains import ZZ

from ..core.exceptions import InputError

Vector = Tuple[Fraction, ...]


# ========================
# Vector arithmetic
# ========================

def vec(values: Iterable) -> Vector:
    return tuple(Fraction(v) for v in values)


def zero(n: int) -> Vector:
    return (Fraction(0),) * n


def add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, u: Vector) -> Vector:
    c = Fraction(c)
    return tuple(c * a for a in u)


def neg(u: Vector) -> Vector:
    return tuple(-a for a in u)


def dot(u: Vector, v: Vector) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def is_zero(u: Vector) -> bool:
    return all(a == 0 for a in u)


def combination(coefficients: Sequence, vectors: Sequence[Vector], n: int) -> Vector:
    out = zero(n)
    for c, v in zip(coefficients, vectors):
        out = add(out, scale(c, v))
    return out


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text) -> Fraction:
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"Not a rational number: {text!r}") from e


# ========================
# sympy bridge
# ========================

def to_sympy(rows: Sequence[Sequence[Fraction]]) -> Matrix:
    return Matrix([[Rational(x.numerator, x.denominator) for x in row] for row in rows])


def from_sympy(value) -> Fraction:
    value = Rational(value)
    return Fraction(int(value.p), int(value.q))


def rank(vectors: Sequence[Vector]) -> int:
    if not vectors:
        return 0
    return to_sympy(vectors).rank()


def det(rows: Sequence[Vector]) -> Fraction:
    if not rows:
        return Fraction(1)
    return from_sympy(to_sympy(rows).det())


def pivot_subset(vectors: Sequence[Vector]) -> List[int]:
    """Indices of a maximal linearly independent subfamily (first-come)."""
    if not vectors:
        return []
    _, pivots = to_sympy(vectors).T.rref()
    return list(pivots)


def nullspace(rows: Sequence[Vector], n: int) -> List[Vector]:
    """Basis of {x : <row, x> = 0 for every row}."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    return [tuple(from_sympy(x) for x in col) for col in to_sympy(rows).nullspace()]


def solve_coordinates(basis: Sequence[Vector], v: Vector) -> Optional[List[Fraction]]:
    """Coordinates of v in an independent family, or None when v is outside its span."""
    if not basis:
        return [] if is_zero(v) else None
    a = to_sympy(basis).T
    b = to_sympy([v]).T
    try:
        solution, params = a.gauss_jordan_solve(b)
    except ValueError:
        return None
    if params.shape[0]:
        raise InputError("Basis vectors are linearly dependent")
    return [from_sympy(x) for x in solution]


class CoordinateFrame:
    """
    Fast exact coordinates with respect to an independent family.

    A square invertible minor is inverted once with sympy; queries then run in
    plain Fraction arithmetic and check membership in the span.
    """

    def __init__(self, basis: Sequence[Vector], n: int):
        self.basis = tuple(basis)
        self.n = n
        self.k = len(self.basis)
        if rank(self.basis) != self.k:
            raise InputError("Basis vectors are linearly dependent")
        if self.k:
            rows = pivot_subset([tuple(b[i] for b in self.basis) for i in range(n)])
            self.rows = rows
            minor = to_sympy([[b[i] for b in self.basis] for i in rows])
            inv = minor.inv()
            self.inverse = [[from_sympy(inv[r, c]) for c in range(self.k)] for r in range(self.k)]
        else:
            self.rows = []
            self.inverse = []

    def coordinates(self, v: Vector) -> Optional[List[Fraction]]:
        picked = [v[i] for i in self.rows]
        coords = [sum((row[c] * picked[c] for c in range(self.k)), Fraction(0)) for row in self.inverse]
        if combination(coords, self.basis, self.n) != tuple(v):
            return None
        return coords


# ========================
# Integer lattices
# ========================

def common_denominator(vectors: Sequence[Vector]) -> int:
    return math.lcm(1, *(x.denominator for v in vectors for x in v))


def hnf_basis(generators: Sequence[Vector], n: int) -> List[Vector]:
    """Z-basis of the lattice spanned by rational generators (Hermite normal form)."""
    gens = [g for g in generators if not is_zero(g)]
    if not gens:
        return []
    d = common_denominator(gens)
    columns = Matrix([[int(x * d) for x in g] for g in gens]).T
    h = hermite_normal_form(columns)
    basis = []
    for j in range(h.shape[1]):
        col = tuple(Fraction(int(h[i, j]), d) for i in range(h.shape[0]))
        if not is_zero(col):
            basis.append(col)
    return basis


def smith_invariants(rows: Sequence[Sequence[int]]) -> List[int]:
    """Nonzero invariant factors of an integer matrix."""
    if not rows:
        return []
    snf = smith_normal_form(Matrix(rows), domain=ZZ)
    k = min(snf.shape)
    return [abs(int(snf[i, i])) for i in range(k) if snf[i, i] != 0]
