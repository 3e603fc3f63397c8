"""
Exact truncated Laurent series and lattice-normalized scalars

SeriesQ carries an absolute precision: coefficients of degree >= prec are
unknown, and every operation propagates the bound (math.inf for exact series).
Reading an unknown coefficient raises instead of returning a silent zero.

NormalizedScalar is a rational times a monomial in lattice covolumes. Factors
over the same subspace are converted into one another exactly; factors over
different subspaces stay symbolic.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Optional, Tuple

from ..core.exceptions import ConsistencyError, InputError
from .linalg import format_rational
from .rootdata import Levi, cochar_lattice, covolume_ratio

logger = logging.getLogger(__name__)


# ========================
# Series
# ========================

class SeriesQ:
    """Laurent series in t with Fraction coefficients, known below degree prec."""

    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs: Optional[Mapping[int, Fraction]] = None, prec: float = math.inf):
        self.prec = prec
        self.coeffs: Dict[int, Fraction] = {
            d: Fraction(c) for d, c in (coeffs or {}).items() if c != 0 and d < prec
        }

    @classmethod
    def constant(cls, c, prec: float = math.inf) -> "SeriesQ":
        return cls({0: Fraction(c)}, prec)

    @classmethod
    def monomial(cls, c, degree: int) -> "SeriesQ":
        return cls({degree: Fraction(c)})

    def valuation(self) -> Optional[int]:
        """Lowest degree with a nonzero coefficient, None if nothing nonzero is known."""
        return min(self.coeffs) if self.coeffs else None

    def coefficient(self, d: int) -> Fraction:
        if d >= self.prec:
            raise ConsistencyError(f"Coefficient of t^{d} is unknown (precision {self.prec})")
        return self.coeffs.get(d, Fraction(0))

    def is_exact(self) -> bool:
        return self.prec == math.inf

    def truncate(self, prec: float) -> "SeriesQ":
        return SeriesQ(self.coeffs, min(self.prec, prec))

    def principal_part(self) -> Dict[int, Fraction]:
        return {d: c for d, c in self.coeffs.items() if d < 0}

    def __add__(self, other) -> "SeriesQ":
        if not isinstance(other, SeriesQ):
            other = SeriesQ.constant(other)
        prec = min(self.prec, other.prec)
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = out.get(d, Fraction(0)) + c
        return SeriesQ(out, prec)

    __radd__ = __add__

    def __neg__(self) -> "SeriesQ":
        return SeriesQ({d: -c for d, c in self.coeffs.items()}, self.prec)

    def __sub__(self, other) -> "SeriesQ":
        return self + (-other if isinstance(other, SeriesQ) else SeriesQ.constant(-Fraction(other)))

    def __mul__(self, other) -> "SeriesQ":
        if not isinstance(other, SeriesQ):
            c = Fraction(other)
            return SeriesQ({d: c * x for d, x in self.coeffs.items()}, self.prec)
        va, vb = self.valuation(), other.valuation()
        if va is None or vb is None:
            # a series with no known nonzero term is O(t^prec)
            low_a = self.prec if va is None else va
            low_b = other.prec if vb is None else vb
            return SeriesQ({}, low_a + low_b)
        prec = min(self.prec + vb, other.prec + va)
        out: Dict[int, Fraction] = {}
        for da, ca in self.coeffs.items():
            for db, cb in other.coeffs.items():
                d = da + db
                if d < prec:
                    out[d] = out.get(d, Fraction(0)) + ca * cb
        return SeriesQ(out, prec)

    __rmul__ = __mul__

    def shift(self, k: int) -> "SeriesQ":
        """Multiply by t^k."""
        return SeriesQ({d + k: c for d, c in self.coeffs.items()}, self.prec + k)

    def rescale(self, a) -> "SeriesQ":
        """Substitute t -> a t."""
        a = Fraction(a)
        if a == 0:
            raise InputError("Cannot rescale a series by zero")
        return SeriesQ({d: c * a ** d for d, c in self.coeffs.items()}, self.prec)

    def inverse(self, order: Optional[int] = None) -> "SeriesQ":
        """1/self; the lowest coefficient must be known and nonzero."""
        v = self.valuation()
        if v is None:
            raise ConsistencyError("Cannot invert a series with no known nonzero coefficient")
        if len(self.coeffs) == 1 and self.is_exact():
            return SeriesQ.monomial(1 / self.coeffs[v], -v)
        prec = self.prec - 2 * v
        if order is not None:
            prec = min(prec, order)
        if prec == math.inf:
            raise InputError("Inverse of an exact non-monomial series needs an order")
        lead = self.coeffs[v]
        # unit part u = self / (lead t^v) = 1 + r, inverse by recursion on coefficients
        length = int(prec + v)
        inv = [Fraction(0)] * max(length, 0)
        if length > 0:
            inv[0] = Fraction(1)
        for k in range(1, length):
            acc = Fraction(0)
            for j in range(1, k + 1):
                acc += self.coeffs.get(v + j, Fraction(0)) / lead * inv[k - j]
            inv[k] = -acc
        return SeriesQ({k - v: c / lead for k, c in enumerate(inv)}, prec)

    def exp(self, order: int) -> "SeriesQ":
        """exp(self) for a series without constant or negative terms."""
        if any(d <= 0 for d in self.coeffs):
            raise InputError("exp needs a series of positive valuation")
        prec = min(self.prec, order)
        result = SeriesQ.constant(1, prec)
        term = SeriesQ.constant(1, prec)
        k = 1
        while True:
            term = (term * self).truncate(prec) * Fraction(1, k)
            if not term.coeffs:
                break
            result = result + term
            k += 1
        return result.truncate(prec)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SeriesQ):
            return NotImplemented
        prec = min(self.prec, other.prec)
        mine = {d: c for d, c in self.coeffs.items() if d < prec}
        theirs = {d: c for d, c in other.coeffs.items() if d < prec}
        return mine == theirs

    def __repr__(self) -> str:
        terms = " + ".join(f"{c}*t^{d}" for d, c in sorted(self.coeffs.items())) or "0"
        return f"SeriesQ({terms} + O(t^{self.prec}))"


def exp_linear(a, order: int) -> SeriesQ:
    """exp(a t) up to t^order."""
    a = Fraction(a)
    coeffs = {}
    term = Fraction(1)
    for k in range(order):
        coeffs[k] = term
        term = term * a / (k + 1)
    return SeriesQ(coeffs, order)


@lru_cache(maxsize=None)
def _bernoulli(order: int) -> SeriesQ:
    # (e^z - 1)/z = sum z^k/(k+1)!
    divided = SeriesQ({k: Fraction(1, math.factorial(k + 1)) for k in range(order)}, order)
    return divided.inverse(order)


def bernoulli(order: int) -> SeriesQ:
    """z/(e^z - 1) up to z^order."""
    return _bernoulli(order)


def expm1_linear(a, order: int) -> SeriesQ:
    """exp(a t) - 1 up to t^order."""
    return exp_linear(a, order) - 1


# ========================
# Normalized scalars
# ========================

LatticeKey = Tuple[str, Levi]


def _sort_key(item) -> tuple:
    (kind, levi), _ = item
    return (levi.blocks, kind)


def _levi_label(levi: Levi) -> str:
    return str(levi)


@dataclass(frozen=True, eq=False)
class NormalizedScalar:
    """value * prod covol(X_*(...))^e; keys are (kind, Levi) with kind in {full, scnx}."""

    value: Fraction
    factors: Tuple[Tuple[LatticeKey, int], ...] = field(default=())

    @classmethod
    def of(cls, value, factors: Optional[Mapping[LatticeKey, int]] = None) -> "NormalizedScalar":
        merged: Dict[LatticeKey, int] = {}
        for key, e in (factors or {}).items():
            kind, _ = key
            if kind not in ("full", "scnx"):
                raise InputError(f"Unknown lattice kind {kind!r}")
            merged[key] = merged.get(key, 0) + e
        items = tuple(sorted(((k, e) for k, e in merged.items() if e), key=_sort_key))
        return cls(Fraction(value), items)

    def factor_map(self) -> Dict[LatticeKey, int]:
        return dict(self.factors)

    def normalized(self) -> "NormalizedScalar":
        """Every factor rewritten over X_*(M_scnx); rank-zero lattices have covolume 1."""
        value = self.value
        out: Dict[LatticeKey, int] = {}
        for (kind, levi), e in self.factors:
            if levi.rank == 0:
                continue
            if kind == "full":
                ratio = covolume_ratio(cochar_lattice(levi, "full"), cochar_lattice(levi, "scnx"))
                value *= ratio ** e
            key = ("scnx", levi)
            out[key] = out.get(key, 0) + e
        return NormalizedScalar.of(value, out)

    def __mul__(self, other) -> "NormalizedScalar":
        if not isinstance(other, NormalizedScalar):
            return NormalizedScalar(self.value * Fraction(other), self.factors)
        merged = self.factor_map()
        for key, e in other.factors:
            merged[key] = merged.get(key, 0) + e
        return NormalizedScalar.of(self.value * other.value, merged)

    __rmul__ = __mul__

    def __add__(self, other: "NormalizedScalar") -> "NormalizedScalar":
        a, b = self.normalized(), other.normalized()
        if a.value == 0:
            return b
        if b.value == 0:
            return a
        if a.factors != b.factors:
            raise ConsistencyError(f"Cannot add scalars with references {a.reference()} and {b.reference()}")
        return NormalizedScalar(a.value + b.value, a.factors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NormalizedScalar):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        if a.value == 0 or b.value == 0:
            return a.value == b.value
        return a.value == b.value and a.factors == b.factors

    def __hash__(self) -> int:
        n = self.normalized()
        return hash((n.value, n.factors) if n.value else 0)

    def is_rational(self) -> bool:
        n = self.normalized()
        return n.value == 0 or not n.factors

    def rational(self) -> Fraction:
        n = self.normalized()
        if n.value and n.factors:
            raise ConsistencyError(f"Scalar still carries covolume factors {n.reference()}")
        return n.value

    def reference(self) -> str:
        parts = [f"covol(X_*({_levi_label(levi)}){'_scnx' if kind == 'scnx' else ''})^{e}"
                 for (kind, levi), e in self.factors]
        return " * ".join(parts) or "1"

    def to_json(self) -> dict:
        n = self.normalized()
        return {"value": format_rational(n.value), "reference": n.reference()}

    def __repr__(self) -> str:
        return f"NormalizedScalar({self.value} * {self.reference()})"


def scalar_sum(values: Iterable[NormalizedScalar]) -> NormalizedScalar:
    total = NormalizedScalar.of(0)
    for v in values:
        total = total + v
    return total
