"""
Randomized identity suites

Seeded random families over SL(n), n in {2, 3, 4}, run through every
invariant the polytope and weights services promise:
- families: positivity, wall agreement of members, restriction to larger Levis
- polytope: three descriptions of C_m agree; closed C_m equals the hull
- chambers: a_T is partitioned by the acute chambers a_P^+
- langlands: the alternating cone sum is the hull's indicator off the walls
- hn: the HN point is unique, lies in the closed polytope and is nearest
- weights: w and v computed directly and as limits agree
- identities: coset-sum identities under two choices of representatives

Case i only depends on (seed, i), so reports are reproducible case by case.
"""

import logging
import random
from fractions import Fraction
from typing import Dict, List, Optional

from ..core.config import settings
from ..core.exceptions import ConsistencyError, HitchinError
from . import linalg
from .families import random_family, random_levi, random_point
from .linalg import Vector
from .polytope import (
    CM_MODES,
    PositiveOrthogonalFamily,
    chamber_partition_check,
    cm_member,
    hn_point,
    hull_member,
    langlands_indicator,
    validate_family,
)
from .rootdata import (
    GroupData,
    Levi,
    cochar_lattice,
    enumerate_levis,
    is_general_position,
    make_group,
    project,
    root_bases,
)
from .weights import (
    generic_directions,
    recollement_check,
    reformulation_check,
    restrict_family,
    v_family,
    weights_report,
    wl_sum_identity,
)

logger = logging.getLogger(__name__)

SIZES = (2, 3, 4)
IDENTITY_SIZES = (2, 3)
SECTIONS = ("families", "polytope", "chambers", "langlands", "hn", "weights", "identities")
LANGLANDS_DIRECTIONS = 10
XIS_PER_FAMILY = 3


class Tally:
    """Counts cases and checks of one suite section and collects failures."""

    def __init__(self):
        self.cases = 0
        self.checks = 0
        self.failures: List[str] = []

    def run(self, label: str, check, *args) -> None:
        self.cases += 1
        try:
            self.checks += check(*args)
        except HitchinError as e:
            logger.error(f"{label}: {e}")
            self.failures.append(f"{label}: {e}")

    def as_dict(self) -> dict:
        return {"cases": self.cases, "checks": self.checks, "failures": list(self.failures)}


# ========================
# Sampling
# ========================

def general_xi(group: GroupData, rng: random.Random) -> Vector:
    while True:
        xi = random_point(group, rng)
        if is_general_position(xi, group):
            return xi


def sample_near(f: PositiveOrthogonalFamily, rng: random.Random) -> Vector:
    """A convex combination of the family points plus a small perturbation."""
    weights = [Fraction(rng.randint(0, 4)) for _ in f.entries]
    if not any(weights):
        weights[0] = Fraction(1)
    total = sum(weights)
    combo = linalg.combination([w / total for w in weights], [Y for _, Y in f.entries], f.group.n)
    return linalg.add(combo, random_point(f.group, rng, spread=1))


def sample_closed_polytope(f: PositiveOrthogonalFamily, rng: random.Random) -> Vector:
    """A point of the closed C_m: hull point in a_M plus anything in a_T^M."""
    weights = [Fraction(rng.randint(0, 4)) for _ in f.entries]
    if not any(weights):
        weights[-1] = Fraction(1)
    total = sum(weights)
    combo = linalg.combination([w / total for w in weights], [Y for _, Y in f.entries], f.group.n)
    free = random_point(f.group, rng)
    return linalg.add(combo, linalg.sub(free, project(free, f.levi)))


def representative_shift(levi: Levi, rng: random.Random) -> Optional[Vector]:
    basis = cochar_lattice(levi, "scnx").basis
    if not basis:
        return None
    coeffs = [rng.choice((-2, -1, 1, 2)) for _ in basis]
    return linalg.combination(coeffs, basis, levi.n)


def _off_walls(f: PositiveOrthogonalFamily, mu: Vector) -> bool:
    return all(
        linalg.dot(w, linalg.sub(mu, f.point(P))) != 0
        for P in f.parabolics
        for w in root_bases(P).fundamental
    )


# ========================
# Checks (each returns the number of checks made, raises on failure)
# ========================

def check_family(f: PositiveOrthogonalFamily, rng: random.Random) -> int:
    checks = len(validate_family(f))
    checks += recollement_check(v_family(f), rng)
    larger = [L for L in enumerate_levis(f.group) if f.levi.refines(L)]
    restricted = restrict_family(f, rng.choice(larger))
    return checks + len(validate_family(restricted)) + 1


def check_polytope(f: PositiveOrthogonalFamily, rng: random.Random, samples: int) -> int:
    points = [Y for _, Y in f.entries]
    points += [random_point(f.group, rng) if k % 2 else sample_near(f, rng) for k in range(samples)]
    for xi in points:
        for closed in (False, True):
            answers = {mode: cm_member(f, xi, closed, mode) for mode in CM_MODES}
            if len(set(answers.values())) != 1:
                raise ConsistencyError(f"C_m descriptions disagree at {xi} (closed={closed}): {answers}")
        if cm_member(f, xi, closed=True) != hull_member(f, xi):
            raise ConsistencyError(f"Closed C_m and the hull disagree at {xi}")
    return 2 * len(points)


def check_chambers(group: GroupData, rng: random.Random, samples: int) -> int:
    for k in range(samples):
        v = list(random_point(group, rng, spread=3, den=2))
        if k % 3 == 0:
            i, j = rng.sample(range(group.n), 2)
            v[j] = v[i]
            v = list(group.to_ambient(v))
        chamber_partition_check(group, v)
    return samples


def check_langlands(f: PositiveOrthogonalFamily, rng: random.Random, samples: int) -> int:
    directions = generic_directions(f.levi, LANGLANDS_DIRECTIONS, rng)
    checks = 0
    for k in range(samples):
        raw = sample_near(f, rng) if k % 2 else random_point(f.group, rng)
        mu = project(raw, f.levi)
        if not _off_walls(f, mu):
            continue
        expected = int(hull_member(f, mu))
        for lam0 in directions:
            got = langlands_indicator(f, mu, lam0)
            if got != expected:
                raise ConsistencyError(f"Langlands sum {got} != hull indicator {expected} at {mu} along {lam0}")
            checks += 1
    return checks


def check_hn(f: PositiveOrthogonalFamily, rng: random.Random, samples: int) -> int:
    checks = 0
    for _ in range(XIS_PER_FAMILY):
        xi = random_point(f.group, rng)
        result = hn_point(f, xi)
        if not cm_member(f, result.rho, closed=True):
            raise ConsistencyError(f"HN point {result.rho} is outside the closed polytope")
        gap = linalg.sub(result.rho, xi)
        if linalg.dot(gap, gap) != result.dist2:
            raise ConsistencyError(f"HN distance {result.dist2} does not match |rho - xi|^2")
        candidates = [Y for _, Y in f.entries] + [sample_closed_polytope(f, rng) for _ in range(samples)]
        for c in candidates:
            d = linalg.sub(c, xi)
            if linalg.dot(d, d) < result.dist2:
                raise ConsistencyError(f"{c} is closer to {xi} than the HN point {result.rho}")
        checks += 2 + len(candidates)
    return checks


def check_weights(f: PositiveOrthogonalFamily, rng: random.Random) -> int:
    for _ in range(XIS_PER_FAMILY):
        weights_report(f, general_xi(f.group, rng))
    return 2 * XIS_PER_FAMILY


def check_identities(f: PositiveOrthogonalFamily, rng: random.Random) -> int:
    xi = general_xi(f.group, rng)
    shifts = (None, representative_shift(f.levi, rng))
    checks = 0
    for shift in shifts:
        lhs, rhs = reformulation_check(f, xi, shift=shift)
        if lhs != rhs:
            raise ConsistencyError(f"Reformulation: coset sum {lhs} != direct count {rhs} (shift={shift})")
        checks += 1
    larger = [L for L in enumerate_levis(f.group) if f.levi.refines(L)]
    L = rng.choice(larger)
    for shift in shifts:
        lhs, rhs = wl_sum_identity(f.levi, L, xi, shift=shift)
        if lhs != rhs:
            raise ConsistencyError(f"w_L coset sum over {f.levi} -> {L}: {lhs} != {rhs}")
        checks += 1
    return checks


# ========================
# Runner
# ========================

def case_rng(seed: int, index: int) -> random.Random:
    return random.Random(seed * 1_000_003 + index)


def run_identities(seed: Optional[int] = None, cases: Optional[int] = None,
                   samples: Optional[int] = None) -> dict:
    """Run every section on `cases` random families, cycling n through 2, 3, 4."""
    seed = settings.SEED if seed is None else seed
    cases = settings.CASES if cases is None else cases
    samples = settings.HULL_SAMPLES if samples is None else samples
    sections: Dict[str, Tally] = {name: Tally() for name in SECTIONS}
    logger.info(f"Identity suites: seed={seed} cases={cases} samples={samples}")

    for i in range(cases):
        n = SIZES[i % len(SIZES)]
        rng = case_rng(seed, i)
        group = make_group(n)
        levi = random_levi(group, rng)
        label = f"case {i} n={n} M={levi}"
        try:
            f = random_family(group, levi, rng, integral=rng.random() < 0.5)
        except HitchinError as e:
            logger.error(f"{label}: could not build a family: {e}")
            sections["families"].failures.append(f"{label}: {e}")
            continue
        logger.debug(f"{label}: {f.to_json()['points']}")

        sections["families"].run(label, check_family, f, rng)
        sections["polytope"].run(label, check_polytope, f, rng, samples)
        sections["chambers"].run(label, check_chambers, group, rng, samples)
        sections["langlands"].run(label, check_langlands, f, rng, samples)
        sections["hn"].run(label, check_hn, f, rng, samples)
        sections["weights"].run(label, check_weights, f, rng)
        if n in IDENTITY_SIZES:
            sections["identities"].run(label, check_identities, f, rng)

    passed = not any(t.failures for t in sections.values())
    logger.info(f"Identity suites finished: passed={passed}")
    return {
        "seed": seed,
        "cases": cases,
        "samples": samples,
        "sections": {name: t.as_dict() for name, t in sections.items()},
        "passed": passed,
    }
