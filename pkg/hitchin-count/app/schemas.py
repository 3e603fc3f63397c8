from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .services.linalg import parse_rational

COMMANDS = ("identities", "hn", "weights", "count", "descent")

Rational = str


def _check_rationals(values):
    for x in values:
        parse_rational(x)
    return values


# Input schemas
class FamilyInput(BaseModel):
    """Positive orthogonal family over SL(n); Levis and parabolic keys are 1-based."""

    n: int = Field(ge=2)
    levi: List[List[int]]
    points: Dict[str, List[Rational]]
    xi: Optional[List[Rational]] = None
    xis: List[List[Rational]] = Field(default_factory=list)

    @field_validator("points")
    @classmethod
    def rational_points(cls, v):
        for coords in v.values():
            _check_rationals(coords)
        return v

    @field_validator("xi")
    @classmethod
    def rational_xi(cls, v):
        return v if v is None else _check_rationals(v)

    @field_validator("xis")
    @classmethod
    def rational_xis(cls, v):
        for xi in v:
            _check_rationals(xi)
        return v


class InstanceInput(BaseModel):
    """Spectral data over F_q(t): split (lambda[, lambda2]) or elliptic (companion)."""

    model_config = ConfigDict(populate_by_name=True)

    q: int = Field(ge=2)
    D: List[List[Union[str, int]]] = Field(default_factory=list)
    lam: Optional[str] = Field(default=None, alias="lambda")
    lam2: Optional[str] = Field(default=None, alias="lambda2")
    companion: Optional[List[int]] = None
    xis: List[List[Rational]] = Field(default_factory=list)
    window: Optional[int] = Field(default=None, ge=0)

    @field_validator("D")
    @classmethod
    def divisor_pairs(cls, v):
        for item in v:
            if len(item) != 2 or not isinstance(item[0], str) or not isinstance(item[1], int):
                raise ValueError(f"D entries are [place, multiplicity], got {item!r}")
        return v

    @field_validator("companion")
    @classmethod
    def companion_pair(cls, v):
        if v is not None and len(v) != 2:
            raise ValueError("companion is [a1, a2] for u^2 + a1 u + a2")
        return v

    @field_validator("xis")
    @classmethod
    def rational_xis(cls, v):
        for xi in v:
            _check_rationals(xi)
        return v


class RunConfig(BaseModel):
    command: Literal["identities", "hn", "weights", "count", "descent"]
    input_path: Optional[str] = None
    seed: int
    cases: int = Field(ge=0)
    samples: Optional[int] = Field(default=None, ge=1)
    json_out: bool = False
    out_path: Optional[str] = None
    xi: Optional[List[Rational]] = None


# Report schemas
class HNReport(BaseModel):
    xi: List[Rational]
    rho: List[Rational]
    q: str
    dist2: Rational


class WeightsReport(BaseModel):
    xi: List[Rational]
    w_direct: int
    w_limit: int
    v_direct: Rational
    v_limit: Rational
    reference_lattice: str
    directions_tested: int


class CountReport(BaseModel):
    instance: dict
    xis: List[List[Rational]]
    direct: List[Rational]
    formula: List[Rational]
    w_form: List[Rational]
    v_form: List[Rational]
    orbits: int
    xi_independent: bool
    bounds_ok: bool


class DescentReport(BaseModel):
    instance: dict
    parabolic: str
    lhs: Rational
    rhs: Rational
    torus_side: Rational
    factor: int
    spot_checks: int


class SuiteSection(BaseModel):
    cases: int = 0
    checks: int = 0
    failures: List[str] = Field(default_factory=list)


class SuiteReport(BaseModel):
    seed: int
    cases: int
    samples: int
    sections: Dict[str, SuiteSection]
    passed: bool


class RunReport(BaseModel):
    command: str
    config: dict
    settings: dict
    result: Union[SuiteReport, List[HNReport], List[WeightsReport], CountReport, DescentReport, None] = None
    error: Optional[str] = None
    exit_code: int
    elapsed_seconds: float
    peak_rss_mb: Optional[float] = None
