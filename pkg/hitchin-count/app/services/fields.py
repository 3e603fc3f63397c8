"""
Finite fields and the rational function field F_q(t)

- Fq: arithmetic tables for q = p^k <= MAX_Q (extension fields through a
  monic irreducible modulus found with sympy's galoistools)
- FqPoly / RationalFunction: exact polynomials and fractions in t
- Place: a monic irreducible of F_q[t] or the place at infinity
- parse_rational_function: "(t+1)/t", "t^2 + 2*t + a" (a generates F_q over F_p)
"""

import itertools
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from sympy import divisors, factorint
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_add, gf_irreducible_p, gf_mul, gf_rem

from ..core.config import settings
from ..core.exceptions import InputError

logger = logging.getLogger(__name__)

INFINITY = float("inf")


# ========================
# F_q
# ========================

class Fq:
    """F_q with elements encoded as ints 0..q-1 (base-p digits of a polynomial in a)."""

    def __init__(self, q: int):
        factors = factorint(q)
        if q < 2 or len(factors) != 1:
            raise InputError(f"q={q} is not a prime power")
        if q > settings.MAX_Q:
            raise InputError(f"q={q} exceeds HITCHIN_MAX_Q={settings.MAX_Q}")
        (self.p, self.k), = factors.items()
        self.q = q
        self.modulus = self._find_modulus() if self.k > 1 else None
        self._add = [[self._slow_add(a, b) for b in range(q)] for a in range(q)]
        self._mul = [[self._slow_mul(a, b) for b in range(q)] for a in range(q)]
        self._inv = [None] + [next(b for b in range(1, q) if self._mul[a][b] == 1) for a in range(1, q)]
        self._neg = [next(b for b in range(q) if self._add[a][b] == 0) for a in range(q)]
        logger.debug(f"Built F_{q} (p={self.p}, k={self.k}, modulus={self.modulus})")

    def _digits(self, a: int) -> List[int]:
        """Coefficients in a, highest degree first (galoistools convention)."""
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return list(reversed(out)) if any(out) else []

    def _encode(self, poly: Sequence[int]) -> int:
        value = 0
        for c in poly:
            value = value * self.p + int(c)
        return value

    def _find_modulus(self) -> List[int]:
        for tail in itertools.product(range(self.p), repeat=self.k):
            f = [1] + list(tail)
            if gf_irreducible_p(f, self.p, ZZ):
                return f
        raise InputError(f"No irreducible polynomial of degree {self.k} over F_{self.p}")

    def _slow_add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return self._encode(gf_add(self._digits(a), self._digits(b), self.p, ZZ))

    def _slow_mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a * b) % self.p
        prod = gf_mul(self._digits(a), self._digits(b), self.p, ZZ)
        return self._encode(gf_rem(prod, self.modulus, self.p, ZZ))

    def elements(self) -> range:
        return range(self.q)

    def units(self) -> range:
        return range(1, self.q)

    def embed(self, c: int) -> int:
        """Image of an integer in the prime field."""
        return c % self.p

    @property
    def generator(self) -> int:
        if self.k == 1:
            raise InputError(f"F_{self.q} is a prime field; 'a' is undefined")
        return self.p

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.q}")
        return self._inv[a]

    def power(self, a: int, e: int) -> int:
        if e < 0:
            return self.power(self.inv(a), -e)
        out = 1
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def label(self, a: int) -> str:
        if self.k == 1:
            return str(a)
        digits = self._digits(a)
        if not digits:
            return "0"
        terms = []
        for i, c in enumerate(digits):
            e = len(digits) - 1 - i
            if c == 0:
                continue
            mono = "" if e == 0 else ("a" if e == 1 else f"a^{e}")
            terms.append(str(c) if not mono else (mono if c == 1 else f"{c}*{mono}"))
        return "+".join(terms)

    def __repr__(self) -> str:
        return f"Fq({self.q})"


@lru_cache(maxsize=None)
def finite_field(q: int) -> Fq:
    return Fq(q)


# ========================
# F_q[t]
# ========================

class FqPoly:
    """Polynomial over F_q; coefficients low degree first, no trailing zeros."""

    __slots__ = ("F", "c")

    def __init__(self, F: Fq, coeffs: Sequence[int] = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.F = F
        self.c = tuple(c)

    @classmethod
    def constant(cls, F: Fq, a: int) -> "FqPoly":
        return cls(F, (a,))

    @classmethod
    def t(cls, F: Fq) -> "FqPoly":
        return cls(F, (0, 1))

    @classmethod
    def monic_of_degree(cls, F: Fq, d: int) -> Iterator["FqPoly"]:
        for tail in itertools.product(F.elements(), repeat=d):
            yield cls(F, tuple(tail) + (1,))

    def _lift(self, other) -> "FqPoly":
        if isinstance(other, FqPoly):
            return other
        return FqPoly.constant(self.F, self.F.embed(other))

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    @property
    def lead(self) -> int:
        return self.c[-1] if self.c else 0

    def is_monic(self) -> bool:
        return self.lead == 1

    def monic(self) -> "FqPoly":
        inv = self.F.inv(self.lead)
        return self.scale(inv)

    def scale(self, a: int) -> "FqPoly":
        return FqPoly(self.F, [self.F.mul(a, x) for x in self.c])

    def __add__(self, other) -> "FqPoly":
        other = self._lift(other)
        n = max(len(self.c), len(other.c))
        a = self.c + (0,) * (n - len(self.c))
        b = other.c + (0,) * (n - len(other.c))
        return FqPoly(self.F, [self.F.add(x, y) for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self) -> "FqPoly":
        return FqPoly(self.F, [self.F.neg(x) for x in self.c])

    def __sub__(self, other) -> "FqPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "FqPoly":
        return self._lift(other) - self

    def __mul__(self, other) -> "FqPoly":
        other = self._lift(other)
        if self.is_zero() or other.is_zero():
            return FqPoly(self.F)
        out = [0] * (len(self.c) + len(other.c) - 1)
        for i, x in enumerate(self.c):
            if x == 0:
                continue
            for j, y in enumerate(other.c):
                out[i + j] = self.F.add(out[i + j], self.F.mul(x, y))
        return FqPoly(self.F, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "FqPoly":
        out = FqPoly.constant(self.F, 1)
        for _ in range(e):
            out = out * self
        return out

    def __divmod__(self, other: "FqPoly") -> Tuple["FqPoly", "FqPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("Polynomial division by zero")
        F = self.F
        rem = list(self.c)
        quo = [0] * max(len(rem) - len(other.c) + 1, 0)
        inv = F.inv(other.lead)
        for i in range(len(rem) - len(other.c), -1, -1):
            coef = F.mul(rem[i + len(other.c) - 1], inv)
            quo[i] = coef
            if coef:
                for j, y in enumerate(other.c):
                    rem[i + j] = F.sub(rem[i + j], F.mul(coef, y))
        return FqPoly(F, quo), FqPoly(F, rem)

    def __floordiv__(self, other: "FqPoly") -> "FqPoly":
        return divmod(self, other)[0]

    def __mod__(self, other: "FqPoly") -> "FqPoly":
        return divmod(self, other)[1]

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = self._lift(other)
        return isinstance(other, FqPoly) and self.F.q == other.F.q and self.c == other.c

    def __hash__(self) -> int:
        return hash((self.F.q, self.c))

    def evaluate(self, x: int) -> int:
        out = 0
        for a in reversed(self.c):
            out = self.F.add(self.F.mul(out, x), a)
        return out

    def is_irreducible(self) -> bool:
        if self.degree < 1:
            return False
        for d in range(1, self.degree // 2 + 1):
            for g in FqPoly.monic_of_degree(self.F, d):
                if (self % g).is_zero():
                    return False
        return True

    def __str__(self) -> str:
        if not self.c:
            return "0"
        terms = []
        for e in range(len(self.c) - 1, -1, -1):
            a = self.c[e]
            if a == 0:
                continue
            coef = self.F.label(a)
            if "+" in coef:
                coef = f"({coef})"
            mono = "" if e == 0 else ("t" if e == 1 else f"t^{e}")
            if not mono:
                terms.append(coef)
            elif a == 1:
                terms.append(mono)
            else:
                terms.append(f"{coef}*{mono}")
        return "+".join(terms)

    def __repr__(self) -> str:
        return f"FqPoly({self})"


def poly_gcd(a: FqPoly, b: FqPoly) -> FqPoly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def poly_xgcd(a: FqPoly, b: FqPoly) -> Tuple[FqPoly, FqPoly, FqPoly]:
    """(g, s, u) with s*a + u*b = g monic."""
    F = a.F
    r0, r1 = a, b
    s0, s1 = FqPoly.constant(F, 1), FqPoly(F)
    u0, u1 = FqPoly(F), FqPoly.constant(F, 1)
    while not r1.is_zero():
        quo, rem = divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - quo * s1
        u0, u1 = u1, u0 - quo * u1
    inv = F.inv(r0.lead)
    return r0.scale(inv), s0.scale(inv), u0.scale(inv)


def inverse_mod(a: FqPoly, m: FqPoly) -> FqPoly:
    g, s, _ = poly_xgcd(a % m, m)
    if g.degree != 0:
        raise InputError(f"{a} is not invertible modulo {m}")
    return s % m


# ========================
# F_q(t)
# ========================

class RationalFunction:
    """num/den in lowest terms with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: FqPoly, den: Optional[FqPoly] = None):
        F = num.F
        if den is None:
            den = FqPoly.constant(F, 1)
        if den.is_zero():
            raise ZeroDivisionError("Rational function with zero denominator")
        g = poly_gcd(num, den) if not num.is_zero() else den.monic()
        num, den = num // g, den // g
        inv = F.inv(den.lead)
        self.num = num.scale(inv)
        self.den = den.scale(inv)

    @property
    def F(self) -> Fq:
        return self.num.F

    @classmethod
    def constant(cls, F: Fq, a: int) -> "RationalFunction":
        return cls(FqPoly.constant(F, a))

    def _lift(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, FqPoly):
            return RationalFunction(other)
        return RationalFunction(FqPoly.constant(self.F, self.F.embed(other)))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other) -> "RationalFunction":
        other = self._lift(other)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._lift(other) - self

    def __mul__(self, other) -> "RationalFunction":
        other = self._lift(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("Inverse of zero")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other) -> "RationalFunction":
        return self * self._lift(other).inverse()

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._lift(other) * self.inverse()

    def __pow__(self, e: int) -> "RationalFunction":
        if e < 0:
            return self.inverse() ** (-e)
        return RationalFunction(self.num ** e, self.den ** e)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, FqPoly)):
            other = self._lift(other)
        return isinstance(other, RationalFunction) and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def at_infinity(self) -> int:
        """Value at t = infinity; raises on a pole."""
        if self.is_zero() or self.num.degree < self.den.degree:
            return 0
        if self.num.degree > self.den.degree:
            raise InputError(f"{self} has a pole at infinity")
        return self.F.mul(self.num.lead, self.F.inv(self.den.lead))

    def __str__(self) -> str:
        if self.den.degree == 0:
            return str(self.num)
        num = str(self.num)
        den = str(self.den)
        if "+" in num:
            num = f"({num})"
        if "+" in den or "*" in den:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


# ========================
# Places
# ========================

@dataclass(frozen=True)
class Place:
    """A monic irreducible pi of F_q[t], or infinity (uniformizer 1/t) when pi is None."""

    pi: Optional[FqPoly]
    q: int

    @property
    def is_infinite(self) -> bool:
        return self.pi is None

    @property
    def degree(self) -> int:
        return 1 if self.pi is None else self.pi.degree

    @property
    def size(self) -> int:
        """Cardinality q_v of the residue field."""
        return self.q ** self.degree

    @property
    def F(self) -> Fq:
        return finite_field(self.q)

    def uniformizer(self) -> RationalFunction:
        if self.pi is None:
            return RationalFunction(FqPoly.constant(self.F, 1), FqPoly.t(self.F))
        return RationalFunction(self.pi)

    def _poly_valuation(self, f: FqPoly) -> int:
        v = 0
        while True:
            quo, rem = divmod(f, self.pi)
            if not rem.is_zero():
                return v
            f = quo
            v += 1

    def valuation(self, r: Union[RationalFunction, FqPoly]) -> float:
        if isinstance(r, FqPoly):
            r = RationalFunction(r)
        if r.is_zero():
            return INFINITY
        if self.pi is None:
            return r.den.degree - r.num.degree
        return self._poly_valuation(r.num) - self._poly_valuation(r.den)

    @property
    def key(self) -> str:
        return "inf" if self.pi is None else str(self.pi)

    def __str__(self) -> str:
        return self.key


def infinity(q: int) -> Place:
    return Place(None, q)


def finite_place(pi: FqPoly) -> Place:
    if not pi.is_monic() or not pi.is_irreducible():
        raise InputError(f"{pi} is not a monic irreducible polynomial")
    return Place(pi, pi.F.q)


def _mobius(e: int) -> int:
    exponents = factorint(e).values()
    if any(x > 1 for x in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


def count_irreducibles(q: int, d: int) -> int:
    """Necklace formula (1/d) sum_{e | d} mobius(e) q^(d/e)."""
    return sum(_mobius(e) * q ** (d // e) for e in divisors(d)) // d


def places(q: int, deg_bound: int) -> List[Place]:
    """Finite places of degree <= deg_bound, by degree, then infinity."""
    if deg_bound < 1:
        raise InputError("deg_bound must be >= 1")
    F = finite_field(q)
    out = []
    for d in range(1, deg_bound + 1):
        found = [Place(f, q) for f in FqPoly.monic_of_degree(F, d) if f.is_irreducible()]
        if len(found) != count_irreducibles(q, d):
            raise InputError(f"Irreducible count mismatch in degree {d} over F_{q}")
        out.extend(found)
    out.append(infinity(q))
    return out


# ========================
# Parsing
# ========================

_TOKEN = re.compile(r"\s*(?:(\d+)|(\*\*|[-+*/^()])|([ta]))")


class _Parser:
    def __init__(self, text: str, F: Fq):
        self.F = F
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise InputError(f"Cannot parse {text!r} at position {pos}")
            self.tokens.append(m.group(1) or m.group(2) or m.group(3))
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise InputError("Unexpected end of expression")
        self.i += 1
        return tok

    def expr(self) -> RationalFunction:
        out = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> RationalFunction:
        out = self.power()
        while self.peek() in ("*", "/") or (self.peek() is not None and self.peek() not in ("+", "-", ")", "^", "**")):
            op = self.take() if self.peek() in ("*", "/") else "*"
            rhs = self.power()
            out = out * rhs if op == "*" else out / rhs
        return out

    def power(self) -> RationalFunction:
        base = self.unary()
        if self.peek() in ("^", "**"):
            self.take()
            exp = self.take()
            if not exp.isdigit():
                raise InputError(f"Exponent must be a nonnegative integer, got {exp!r}")
            base = base ** int(exp)
        return base

    def unary(self) -> RationalFunction:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.atom()

    def atom(self) -> RationalFunction:
        tok = self.take()
        F = self.F
        if tok == "(":
            out = self.expr()
            if self.take() != ")":
                raise InputError("Unbalanced parentheses")
            return out
        if tok == "t":
            return RationalFunction(FqPoly.t(F))
        if tok == "a":
            return RationalFunction.constant(F, F.generator)
        if tok.isdigit():
            return RationalFunction.constant(F, F.embed(int(tok)))
        raise InputError(f"Unexpected token {tok!r}")


def parse_rational_function(text: str, q: int) -> RationalFunction:
    parser = _Parser(str(text), finite_field(q))
    try:
        out = parser.expr()
    except ZeroDivisionError as e:
        raise InputError(f"Division by zero in {text!r}") from e
    if parser.peek() is not None:
        raise InputError(f"Trailing input in {text!r}")
    return out


def parse_place(text: str, q: int) -> Place:
    if str(text).strip() in ("inf", "infinity"):
        return infinity(q)
    r = parse_rational_function(text, q)
    if r.den.degree != 0:
        raise InputError(f"Place {text!r} is not a polynomial")
    return finite_place(r.num)


def factor_places(f: FqPoly) -> List[Tuple[Place, int]]:
    """Monic irreducible factors of a nonzero polynomial with multiplicities, by trial division."""
    if f.is_zero():
        raise InputError("Cannot factor the zero polynomial")
    F = f.F
    f = f.monic()
    out = []
    d = 1
    while f.degree >= 1:
        if 2 * d > f.degree:
            out.append((Place(f, F.q), 1))
            break
        for g in FqPoly.monic_of_degree(F, d):
            if not g.is_irreducible():
                continue
            e = 0
            while True:
                quo, rem = divmod(f, g)
                if not rem.is_zero():
                    break
                f, e = quo, e + 1
            if e:
                out.append((Place(g, F.q), e))
        d += 1
    merged = {}
    for place, e in out:
        merged[place] = merged.get(place, 0) + e
    return sorted(merged.items(), key=lambda item: (item[0].degree, item[0].pi.c))


def residue_representatives(v: Place) -> List[FqPoly]:
    """Polynomials of degree < deg(v): representatives of the residue field at a finite place."""
    if v.is_infinite:
        raise InputError("Residue representatives are only used at finite places")
    F = v.F
    return [FqPoly(F, coeffs) for coeffs in itertools.product(F.elements(), repeat=v.degree)]
