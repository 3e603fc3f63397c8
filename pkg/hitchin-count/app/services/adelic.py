"""
Hitchin fibers of SL(2) over F_q(t), counted two ways

Spectral data, local lattice classes and their Iwasawa heights, weighted
orbital integrals, and the fiber count:
- direct: global classes satisfying the local and xi-conditions, each
  weighted by 1/|stabilizer|
- formula: vol(a,t) times the sum of weighted orbital integrals, in the
  w-form and in the v-form
- descent of the unipotent part and the GL(2) degree bound

The base is P^1 with the marked point at infinity; local classes are kept as
exact global rational functions, so valuations never depend on a truncation.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ..core.config import settings
from ..core.exceptions import ConsistencyError, InputError, WindowError
from . import linalg
from .families import borel_order, iwasawa_height
from .fields import (
    FqPoly,
    Place,
    RationalFunction,
    factor_places,
    finite_field,
    infinity,
    inverse_mod,
    parse_place,
    parse_rational_function,
    places,
    residue_representatives,
)
from .hull import ConvexHull
from .linalg import Vector
from .polytope import PositiveOrthogonalFamily, hull_member, validate_family
from .rootdata import (
    Levi,
    Parabolic,
    is_general_position,
    make_group,
    p_of,
    project,
    root_bases,
    torus,
    whole,
)
from .series import NormalizedScalar, scalar_sum
from .weights import v_weight, w_weight

logger = logging.getLogger(__name__)

GROUP = make_group(2)
TORUS = torus(GROUP)
B = Parabolic(((0,), (1,)))
B_BAR = Parabolic(((1,), (0,)))

Matrix2 = List[List[RationalFunction]]

WEIGHTS = ("one", "vM", "wM", "vQ", "vL")


# ========================
# Spectral data
# ========================

@dataclass(frozen=True)
class CharDatum:
    """
    Characteristic data (a, t) on P^1.

    Split: eigenvalue functions (l1, l2), with (lam, -lam) for SL(2).
    Elliptic: constant u^2 + a1 u + a2 irreducible over F_q, D = 0.
    """

    q: int
    D: Tuple[Tuple[Place, int], ...]
    eigen: Optional[Tuple[RationalFunction, RationalFunction]] = None
    companion: Optional[Tuple[int, int]] = None

    @property
    def F(self):
        return finite_field(self.q)

    @property
    def levi(self) -> str:
        return "T" if self.eigen is not None else "G"

    @property
    def is_split(self) -> bool:
        return self.eigen is not None

    @property
    def t_order(self) -> Tuple[int, int]:
        if self.eigen is None:
            raise InputError("Elliptic data has no ordering of roots at infinity over F_q")
        return self.eigen[0].at_infinity(), self.eigen[1].at_infinity()

    def d_at(self, v: Place) -> int:
        return dict(self.D).get(v, 0)

    @property
    def deg_D(self) -> int:
        return sum(v.degree * d for v, d in self.D)

    @cached_property
    def delta(self) -> RationalFunction:
        if self.eigen is None:
            raise InputError("delta is only defined for split data")
        return self.eigen[0] - self.eigen[1]

    def m_at(self, v: Place) -> int:
        """m_v = d_v + val_v(l1 - l2); zero everywhere for elliptic data."""
        if self.eigen is None:
            return 0
        return self.d_at(v) + int(v.valuation(self.delta))

    @cached_property
    def relevant_places(self) -> Tuple[Place, ...]:
        """Finite places with m_v > 0, i.e. with nontrivial local classes."""
        if self.eigen is None:
            return ()
        candidates = {v for v, _ in self.D}
        candidates.update(v for v, _ in factor_places(self.delta.num))
        return tuple(sorted((v for v in candidates if self.m_at(v) > 0),
                            key=lambda v: (v.degree, v.pi.c)))

    def matrix(self) -> Matrix2:
        F = self.F
        if self.eigen is not None:
            l1, l2 = self.eigen
            zero = RationalFunction.constant(F, 0)
            return [[l1, zero], [zero, l2]]
        a1, a2 = self.companion
        return [
            [RationalFunction.constant(F, 0), RationalFunction.constant(F, F.neg(a2))],
            [RationalFunction.constant(F, 1), RationalFunction.constant(F, F.neg(a1))],
        ]

    def to_json(self) -> dict:
        out = {"q": self.q, "D": [[v.key, d] for v, d in self.D], "levi": self.levi}
        if self.eigen is not None:
            out["eigenvalues"] = [str(x) for x in self.eigen]
        else:
            out["companion"] = list(self.companion)
        return out


def build_char(q: int, D: Sequence[Tuple[Union[Place, str], int]], lam=None, lam2=None,
               companion: Optional[Sequence[int]] = None) -> CharDatum:
    """
    Validate and assemble spectral data.

    lam alone gives the SL(2) form (lam, -lam); lam with lam2 gives the GL(2)
    layer; companion=(a1, a2) gives the elliptic case.
    """
    F = finite_field(q)
    divisor: Dict[Place, int] = {}
    for v, d in D:
        v = parse_place(v, q) if isinstance(v, str) else v
        if v.is_infinite:
            raise InputError("D must not meet the place at infinity")
        if int(d) < 0:
            raise InputError(f"Negative multiplicity {d} at {v}")
        if int(d):
            divisor[v] = divisor.get(v, 0) + int(d)
    D_items = tuple(sorted(divisor.items(), key=lambda item: (item[0].degree, item[0].pi.c)))

    if companion is not None:
        if lam is not None or lam2 is not None:
            raise InputError("Give either eigenvalues or a companion polynomial")
        if D_items:
            raise InputError("Elliptic data is supported only with D = 0")
        a1, a2 = (int(x) % F.q for x in companion)
        for u in F.elements():
            if F.add(F.add(F.mul(u, u), F.mul(a1, u)), a2) == 0:
                raise InputError(f"u^2 + {a1}u + {a2} has the root {u} in F_{q}")
        return CharDatum(q, D_items, None, (a1, a2))

    if lam is None:
        raise InputError("Split data needs an eigenvalue function")
    l1 = parse_rational_function(lam, q) if isinstance(lam, str) else lam
    if lam2 is None:
        if l1.is_zero():
            raise InputError("lambda must be nonzero")
        l2 = -l1
    else:
        l2 = parse_rational_function(lam2, q) if isinstance(lam2, str) else lam2
    for value in (l1, l2):
        if value.is_zero():
            continue
        for v, e in factor_places(value.den):
            if e > divisor.get(v, 0):
                raise InputError(f"{value} has a pole of order {e} at {v}, exceeding D")
        value.at_infinity()
    c = CharDatum(q, D_items, (l1, l2))
    r1, r2 = c.t_order
    if r1 == r2:
        raise InputError(f"Roots at infinity coincide ({F.label(r1)}): not infinity-regular")
    return c


# ========================
# Local classes
# ========================

def _zero(F) -> RationalFunction:
    return RationalFunction(FqPoly(F))


def mat_mul(x: Matrix2, y: Matrix2) -> Matrix2:
    return [[x[i][0] * y[0][j] + x[i][1] * y[1][j] for j in range(2)] for i in range(2)]


def mat_inverse(x: Matrix2) -> Matrix2:
    det = x[0][0] * x[1][1] - x[0][1] * x[1][0]
    return [[x[1][1] / det, -x[0][1] / det], [-x[1][0] / det, x[0][0] / det]]


def principal_part(r: RationalFunction, v: Place) -> RationalFunction:
    """Canonical representative P / pi^m (deg P < m deg pi) of r modulo O_v."""
    if v.is_infinite:
        raise InputError("principal_part is taken at finite places")
    val = v.valuation(r)
    if val >= 0:
        return _zero(r.F)
    m = int(-val)
    modulus = v.pi ** m
    rest = r.den // modulus
    numerator = (r.num * inverse_mod(rest, modulus)) % modulus
    return RationalFunction(numerator, modulus)


@dataclass(frozen=True)
class LocalClass:
    """Lattice class of [[z^a, y], [0, z^-a]] at v, y taken modulo z^a O_v."""

    place: Place
    a: int
    y: RationalFunction

    @cached_property
    def rep(self) -> Matrix2:
        z = self.place.uniformizer()
        return [[z ** self.a, self.y], [_zero(z.F), z ** (-self.a)]]

    def height(self, P: Parabolic) -> Vector:
        v = self.place
        return iwasawa_height(self.rep, borel_order(P), v.valuation, v.degree)

    @cached_property
    def h_b(self) -> Vector:
        return self.height(B)

    @cached_property
    def h_bbar(self) -> Vector:
        return self.height(B_BAR)

    @property
    def polar_order(self) -> int:
        val = self.place.valuation(self.y)
        return 0 if val == math.inf else max(0, int(-val))

    @property
    def key(self) -> Tuple[str, int, str]:
        return (self.place.key, self.a, str(self.y))


def window_elements(v: Place, lo: int, hi: int) -> Iterator[RationalFunction]:
    """All sum_{lo <= j < hi} r_j z^j with r_j running over residue representatives."""
    z = v.uniformizer()
    F = v.F
    if v.is_infinite:
        reps = [RationalFunction.constant(F, c) for c in F.elements()]
    else:
        reps = [RationalFunction(r) for r in residue_representatives(v)]
    powers = [z ** j for j in range(lo, hi)]
    for choice in itertools.product(reps, repeat=len(powers)):
        total = _zero(F)
        for r, p in zip(choice, powers):
            if not r.is_zero():
                total = total + r * p
        yield total


def satisfies_condition(c: CharDatum, g: Matrix2, v: Place) -> bool:
    """Ad(g^-1) X lies in z^-d_v gl_2(O_v)."""
    conj = mat_mul(mat_inverse(g), mat_mul(c.matrix(), g))
    bound = -c.d_at(v)
    return all(v.valuation(x) >= bound for row in conj for x in row)


def scan_lattices(c: CharDatum, v: Place, window: int) -> List[LocalClass]:
    """Every SL-normalized class with |a| <= window and val(y) >= a - window meeting the condition."""
    found = []
    for a in range(-window, window + 1):
        for y in window_elements(v, a - window, a):
            cls = LocalClass(v, a, y)
            if satisfies_condition(c, cls.rep, v):
                found.append(cls)
    return found


def certified_window(c: CharDatum, v: Place) -> int:
    return c.m_at(v) + 1


@lru_cache(maxsize=None)
def local_springer(c: CharDatum, v: Place, window: Optional[int] = None) -> Tuple[LocalClass, ...]:
    """
    Local classes at v modulo the centralizer of X.

    Split data: T(F_v)-orbit representatives (a = 0, y a principal part),
    q_v^{m_v} of them. Elliptic data: the stable lattices themselves, which
    form a single class at places of odd degree.
    """
    bound = certified_window(c, v)
    if window is None:
        window = bound + settings.WINDOW_PAD
    if window < bound:
        raise WindowError(f"Window {window} at {v} is below the certified bound {bound}")
    raw = scan_lattices(c, v, window)
    if not c.is_split:
        if v.degree % 2 == 0:
            raise InputError(f"Elliptic torus splits at the even-degree place {v}")
        return tuple(raw)
    z = v.uniformizer()
    reps = {}
    for cls in raw:
        y = principal_part(cls.y * z ** (-cls.a), v)
        reps[str(y)] = LocalClass(v, 0, y)
    out = tuple(reps[k] for k in sorted(reps))
    expected = v.size ** c.m_at(v)
    if len(out) != expected:
        raise ConsistencyError(f"Found {len(out)} local classes at {v}, expected {expected}")
    logger.debug(f"local_springer at {v}: m_v={c.m_at(v)} window={window} raw={len(raw)} orbits={len(out)}")
    return out


def expected_local_classes(c: CharDatum, v: Place) -> List[LocalClass]:
    """a = 0 representatives read off val(y) >= -m_v directly."""
    m = c.m_at(v)
    return sorted((LocalClass(v, 0, principal_part(y, v)) for y in window_elements(v, -m, 0)),
                  key=lambda cls: str(cls.y))


# ========================
# Global points
# ========================

@dataclass(frozen=True)
class AdelicPoint:
    """Degree a at infinity and a = 0 local classes at the relevant finite places."""

    datum: CharDatum
    a: int
    classes: Tuple[LocalClass, ...]

    def all_classes(self) -> List[LocalClass]:
        return list(self.classes) + [LocalClass(infinity(self.datum.q), self.a, _zero(self.datum.F))]

    @property
    def s(self) -> int:
        return sum(cls.place.degree * cls.polar_order for cls in self.classes)

    @cached_property
    def family(self) -> PositiveOrthogonalFamily:
        points = {P: linalg.neg(hp_global(self, P)) for P in p_of(TORUS)}
        return PositiveOrthogonalFamily.build(GROUP, TORUS, points)

    @property
    def key(self) -> tuple:
        return (self.a,) + tuple(cls.key for cls in self.classes)


def hp_global(pt: AdelicPoint, P: Parabolic) -> Vector:
    """H_P of the adelic point: the finite sum of local heights."""
    total = linalg.zero(2)
    for cls in pt.all_classes():
        total = linalg.add(total, cls.height(P))
    return total


def orbit_representatives(c: CharDatum, window: Optional[int] = None) -> List[Tuple[LocalClass, ...]]:
    local_sets = [local_springer(c, v, window) for v in c.relevant_places]
    return list(itertools.product(*local_sets))


def _scale_classes(classes: Sequence[LocalClass], unit: int) -> Tuple[LocalClass, ...]:
    F = classes[0].place.F if classes else None
    out = []
    for cls in classes:
        factor = RationalFunction.constant(F, F.mul(unit, unit))
        out.append(LocalClass(cls.place, 0, principal_part(cls.y * factor, cls.place)))
    return tuple(out)


def norm_one_constants(c: CharDatum) -> List[Tuple[int, int]]:
    """T_X(F) meeting T_X(O_v) at every place: (a, b) for a + bX, or (u, 0) for diag(u, 1/u)."""
    F = c.F
    if c.is_split:
        return [(u, 0) for u in F.units()]
    a1, a2 = c.companion
    out = []
    for a, b in itertools.product(F.elements(), repeat=2):
        det = F.add(F.sub(F.mul(a, a), F.mul(a1, F.mul(a, b))), F.mul(a2, F.mul(b, b)))
        if det == 1:
            out.append((a, b))
    return out


def _constant_matrix(c: CharDatum, a: int, b: int) -> Matrix2:
    F = c.F
    X = c.matrix()
    return [[RationalFunction.constant(F, a if i == j else 0) + X[i][j] * RationalFunction.constant(F, b)
             for j in range(2)] for i in range(2)]


def fixes_lattice(k: Matrix2, cls: LocalClass) -> bool:
    """k g O_v^2 = g O_v^2 for det k = 1."""
    v = cls.place
    conj = mat_mul(mat_inverse(cls.rep), mat_mul(k, cls.rep))
    return all(v.valuation(x) >= 0 for row in conj for x in row)


def stabilizer(pt: AdelicPoint) -> list:
    """
    Automorphisms of the point in the centralizer of X over F_q.

    Split: units c with diag(c, 1/c) fixing every local class. Elliptic: the
    norm-one elements a + bX of F_q[X] fixing every chosen lattice.
    """
    c = pt.datum
    if c.is_split:
        return [u for u in c.F.units() if _scale_classes(pt.classes, u) == pt.classes]
    return [(a, b) for a, b in norm_one_constants(c)
            if all(fixes_lattice(_constant_matrix(c, a, b), cls) for cls in pt.classes)]


def _xi_coordinate(xi: Vector) -> Fraction:
    return xi[0]


def check_xi(xi: Sequence) -> Vector:
    xi = GROUP.check(xi)
    if not is_general_position(xi, GROUP):
        raise InputError(f"xi={xi} is not in general position")
    return xi


def fiber_points(c: CharDatum, xi: Vector, window: Optional[int] = None) -> List[AdelicPoint]:
    """Global classes whose family hull contains xi."""
    xi1 = _xi_coordinate(xi)
    out = []
    for classes in orbit_representatives(c, window):
        s = sum(cls.place.degree * cls.polar_order for cls in classes)
        for a in range(math.floor(xi1) - 1, math.floor(xi1) + s + 2):
            pt = AdelicPoint(c, a, tuple(classes))
            if hull_member(pt.family, xi):
                out.append(pt)
    return out


def elliptic_local_sets(c: CharDatum, window: Optional[int] = None) -> Dict[Place, Tuple[LocalClass, ...]]:
    """
    Stable lattices at infinity and at the places of degree one.

    With D = 0 the companion matrix is integral with irreducible residue
    polynomial everywhere, so each set is the standard lattice alone.
    """
    if c.is_split:
        raise InputError("Lattice sets at every place are taken for elliptic data")
    out = {}
    for v in places(c.q, 1):
        found = local_springer(c, v, window)
        if len(found) != 1:
            raise ConsistencyError(f"Found {len(found)} stable lattices at {v} for elliptic data, expected 1")
        out[v] = found
    return out


def _elliptic_count_direct(c: CharDatum, window: Optional[int] = None) -> Fraction:
    local_sets = elliptic_local_sets(c, window)
    constants = norm_one_constants(c)
    total = Fraction(0)
    for classes in itertools.product(*local_sets.values()):
        pt = AdelicPoint(c, 0, tuple(classes))
        stab = stabilizer(pt)
        if len(constants) % len(stab):
            raise ConsistencyError(f"Stabilizer of order {len(stab)} does not divide {len(constants)}")
        total += Fraction(1, len(stab))
    logger.info(f"Direct count for {c.to_json()}: {total} over {len(local_sets)} places")
    return total


def fiber_count_direct(c: CharDatum, xi: Sequence, window: Optional[int] = None) -> Fraction:
    """Groupoid cardinality: sum over F_q-rational orbits of 1/|stabilizer|."""
    xi = check_xi(xi)
    if not c.is_split:
        return _elliptic_count_direct(c, window)
    units = list(c.F.units())
    seen = set()
    total = Fraction(0)
    for pt in fiber_points(c, xi, window):
        if pt.key in seen:
            continue
        orbit = {AdelicPoint(c, pt.a, _scale_classes(pt.classes, u)).key for u in units}
        seen |= orbit
        stab = stabilizer(pt)
        if len(orbit) * len(stab) != len(units):
            raise ConsistencyError(f"Orbit-stabilizer fails at {pt.key}")
        total += Fraction(1, len(stab))
    logger.info(f"Direct count for {c.to_json()} at xi={xi}: {total}")
    return total


# ========================
# Orbital integrals and the formula side
# ========================

@dataclass(frozen=True)
class IdeleClassCount:
    """T_X(F) \\ T_X(A)^1 / T_X(O) read on ideles supported at places of degree <= deg_bound."""

    support: Tuple[Place, ...]
    classes: int
    units: int

    @property
    def volume(self) -> Fraction:
        """Each class is a T_X(O)-orbit of volume 1/|T_X(F) meet T_X(O)|."""
        return Fraction(self.classes, self.units)


def local_quotient_rank(c: CharDatum, v: Place) -> int:
    """Rank of T_X(F_v)/T_X(O_v): one where T_X splits at v, zero where it stays compact."""
    if c.is_split:
        return 1
    return 1 if v.degree % 2 == 0 else 0


def _unit(i: int, n: int) -> Vector:
    return tuple(Fraction(int(i == j)) for j in range(n))


def norm_one_ideles(c: CharDatum, support: Sequence[Place]) -> List[Vector]:
    """Z-basis of the degree-zero part of prod_v T_X(F_v)/T_X(O_v) on the support."""
    n = len(support)
    if not c.is_split:
        return [_unit(i, n) for i in range(n)]
    at_infinity = [i for i, v in enumerate(support) if v.is_infinite]
    if not at_infinity:
        raise InputError("The idele support must contain infinity")
    k = at_infinity[0]
    return [linalg.sub(_unit(i, n), linalg.scale(v.degree, _unit(k, n)))
            for i, v in enumerate(support) if i != k]


def principal_ideles(c: CharDatum, support: Sequence[Place]) -> List[Vector]:
    """
    Images of global elements of T_X(F) on the support.

    Split: the monic irreducibles pi_v, valued at every place of the support.
    Elliptic: x / x^sigma for a prime x of F_{q^2}(t) above an even-degree v,
    which is the unit vector at v.
    """
    n = len(support)
    if not c.is_split:
        return [_unit(i, n) for i in range(n)]
    return [tuple(Fraction(int(u.valuation(v.pi))) for u in support) for v in support if not v.is_infinite]


def idele_classes(c: CharDatum, deg_bound: int = 1) -> IdeleClassCount:
    """Index of the principal ideles in the norm-one ideles over places of degree <= deg_bound."""
    support = tuple(v for v in places(c.q, deg_bound) if local_quotient_rank(c, v))
    ambient = norm_one_ideles(c, support)
    principal = principal_ideles(c, support)
    coordinates = []
    for g in principal:
        coords = linalg.solve_coordinates(ambient, g) if ambient else []
        if coords is None or any(x.denominator != 1 for x in coords):
            raise ConsistencyError(f"Global element {g} is not a norm-one idele on {[str(v) for v in support]}")
        coordinates.append([int(x) for x in coords])
    invariants = linalg.smith_invariants(coordinates) if ambient else []
    if len(invariants) != len(ambient):
        raise ConsistencyError(f"Principal ideles have rank {len(invariants)} < {len(ambient)}: infinite quotient")
    classes = math.prod(invariants)
    units = len(norm_one_constants(c))
    logger.debug(f"Idele classes over {len(support)} places of degree <= {deg_bound}: {classes} classes, {units} units")
    return IdeleClassCount(support, classes, units)


def vol_at(c: CharDatum, deg_bound: int = 1) -> Fraction:
    """vol(T_X(F) \\ T_X(A)^1) with vol(T_X(O)) = 1 on P^1."""
    return idele_classes(c, deg_bound).volume


def relative_volume(f: PositiveOrthogonalFamily, Q: Parabolic) -> Fraction:
    """Volume of the hull of the a_M^Q-parts of Y_P, P in Q, in coroot coordinates."""
    inside = [P for P in f.parabolics if Q.contains(P)]
    if not inside:
        raise InputError(f"No parabolic of the family inside {Q}")
    coroots = [c for c in root_bases(inside[0]).coroots if linalg.is_zero(project(c, Q))]
    frame = linalg.CoordinateFrame(coroots, f.group.n)
    points = [project(f.point(P), Q, "onto_aTP") for P in inside]
    return ConvexHull(points).volume(frame.coordinates, len(coroots))


def orbital_integral(c: CharDatum, weight: str = "one", xi: Optional[Sequence] = None,
                     Q: Optional[Parabolic] = None, window: Optional[int] = None,
                     L: Optional[Levi] = None):
    """
    J(X) = sum over T_X-orbits of local classes of weight(g); each orbit has
    measure one once vol(T(O)) = 1.

    vL is v^L_M for a Levi L containing M = T: v^T_T is 1 and v^G_T is v_M.
    Returns a NormalizedScalar for vM and vL with L = G, a Fraction otherwise.
    """
    if weight not in WEIGHTS:
        raise InputError(f"Unknown weight {weight!r}")
    if not c.is_split:
        # M = G: only v^G_G = 1 is defined
        if weight != "one" and not (weight == "vL" and L == whole(GROUP)):
            raise InputError("Weighted orbital integrals need split data")
        count = 1
        for found in elliptic_local_sets(c, window).values():
            count *= len(found)
        return Fraction(count)
    if weight == "vL":
        if L == TORUS:
            weight = "one"
        elif L == whole(GROUP):
            weight = "vM"
        else:
            raise InputError(f"vL needs L in {{{TORUS}, {whole(GROUP)}}}, got {L}")
    reps = orbit_representatives(c, window)
    if weight == "one":
        return Fraction(len(reps))
    families = [AdelicPoint(c, 0, classes).family for classes in reps]
    if weight == "vM":
        return scalar_sum(v_weight(f, "limit") for f in families)
    if weight == "wM":
        if xi is None:
            raise InputError("wM needs xi")
        xi = check_xi(xi)
        return Fraction(sum(w_weight(f, xi, "limit") for f in families))
    if Q is None or Q not in (B, B_BAR):
        raise InputError("vQ needs Q in {B, B_bar}")
    return sum((relative_volume(f, Q) for f in families), Fraction(0))


def formula_forms(c: CharDatum, xi: Sequence, window: Optional[int] = None) -> Tuple[Fraction, Fraction]:
    """(w-form, v-form) of the counting formula."""
    xi = check_xi(xi)
    vol = vol_at(c)
    if not c.is_split:
        j = orbital_integral(c, "one", window=window)
        return vol * j, vol * j
    covol = NormalizedScalar.of(1, {("full", TORUS): -1})
    w_total = Fraction(0)
    v_total = Fraction(0)
    for classes in orbit_representatives(c, window):
        f = AdelicPoint(c, 0, classes).family
        w = w_weight(f, xi, "limit")
        v = (v_weight(f, "limit") * covol).rational()
        if v != w:
            raise ConsistencyError(f"Comparison fails on {[cls.key for cls in classes]}: v={v} w={w}")
        w_total += w
        v_total += v
    return vol * w_total, vol * v_total


def fiber_count_formula(c: CharDatum, xi: Sequence, window: Optional[int] = None) -> Fraction:
    w_form, v_form = formula_forms(c, xi, window)
    if w_form != v_form:
        raise ConsistencyError(f"w-form {w_form} != v-form {v_form}")
    logger.info(f"Formula count for {c.to_json()} at xi={list(xi)}: {w_form}")
    return w_form


# ========================
# Descent and bounds
# ========================

def iwasawa_levi(g: Matrix2, Q: Parabolic, v: Place) -> Tuple[Matrix2, Matrix2, Matrix2]:
    """g = n l k with n unipotent in Q, l diagonal and k in SL_2(O_v)."""
    order = borel_order(Q)
    F = v.F
    one = RationalFunction.constant(F, 1)
    zero = _zero(F)
    gp = [[g[order[i]][order[j]] for j in range(2)] for i in range(2)]
    c_, d_ = gp[1]
    if v.valuation(d_) <= v.valuation(c_):
        l2 = d_
        bottom = [c_ / l2, one]
        top = [one, zero]
    else:
        l2 = c_
        bottom = [one, d_ / l2]
        top = [zero, -one]
    kp = [top, bottom]
    h = mat_mul(gp, mat_inverse(kp))
    if not h[1][0].is_zero():
        raise ConsistencyError("Iwasawa factorization left a lower-left entry")
    lp = [[h[0][0], zero], [zero, h[1][1]]]
    np_ = [[one, h[0][1] / h[1][1]], [zero, one]]
    inverse = [order.index(i) for i in range(2)]

    def back(x: Matrix2) -> Matrix2:
        return [[x[inverse[i]][inverse[j]] for j in range(2)] for i in range(2)]

    return back(np_), back(lp), back(kp)


def check_iwasawa_levi(cls: LocalClass, Q: Parabolic) -> bool:
    """k integral unimodular, g = n l k, H_Q(g) = H_T(l), and v^Q_T = v^T_T = 1."""
    v = cls.place
    g = cls.rep
    n, l, k = iwasawa_levi(g, Q, v)
    if mat_mul(n, mat_mul(l, k)) != g:
        return False
    det_k = k[0][0] * k[1][1] - k[0][1] * k[1][0]
    if any(v.valuation(x) < 0 for row in k for x in row) or v.valuation(det_k) != 0:
        return False
    h_levi = GROUP.to_ambient([-v.degree * v.valuation(l[i][i]) for i in range(2)])
    if cls.height(Q) != h_levi:
        return False
    point = PositiveOrthogonalFamily.build(GROUP, TORUS, {P: linalg.neg(cls.height(P)) for P in p_of(TORUS)})
    return relative_volume(point, Q) == 1


def vmq_vml_spot_check(c: CharDatum, limit: int = 50, window: Optional[int] = None) -> int:
    """
    Runs check_iwasawa_levi on window classes at the relevant places (then at
    t); returns how many were checked.
    """
    checked = 0
    places = list(dict.fromkeys(list(c.relevant_places) + [p for p, _ in factor_places(FqPoly.t(c.F))]))
    for v in places:
        w = window or certified_window(c, v) + settings.WINDOW_PAD
        classes = (LocalClass(v, a, y) for a in range(-w, w + 1) for y in window_elements(v, a - w, a))
        for cls in classes:
            for Q in (B, B_BAR):
                if not check_iwasawa_levi(cls, Q):
                    raise ConsistencyError(f"Iwasawa Levi check fails at {cls.key} for {Q}")
            checked += 1
            if checked >= limit:
                return checked
    return checked


def torus_side(c: CharDatum) -> Fraction:
    """J^T_T: one class per place, counted iff X is z^-D-integral on the torus."""
    for v, _ in c.D:
        if any(v.valuation(x) < -c.d_at(v) for x in c.eigen if not x.is_zero()):
            return Fraction(0)
    return Fraction(1)


def descent_check(c: CharDatum, Q: Parabolic = B, window: Optional[int] = None) -> Tuple[Fraction, Fraction]:
    """J^Q_T against q^{deg D} J^T_T."""
    if not c.is_split:
        raise InputError("Descent is checked on split data")
    lhs = orbital_integral(c, "vQ", Q=Q, window=window)
    rhs = Fraction(c.q) ** c.deg_D * torus_side(c)
    return lhs, rhs


def gl2_bound_check(pt: AdelicPoint) -> bool:
    """0 <= x_alpha <= 2 deg D for the assembled family."""
    x = validate_family(pt.family)[(B, B_BAR)]
    return 0 <= x <= 2 * pt.datum.deg_D
