"""
hitchin-count command line

Usage:
    python -m app.main identities --seed 7 --cases 100 --json
    python -m app.main hn --input data/segment_family.json --xi 5/2 -5/2
    python -m app.main weights --input data/rank2_family.json
    python -m app.main count --input data/split_q3.json --json --out report.json
    python -m app.main descent --input data/split_q3.json

Exit codes: 0 success, 1 identity or assertion failure, 2 input error.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import ValidationError

from .core.config import settings
from .core.exceptions import ConsistencyError, HitchinError, InputError
from .core.log import setup_logging
from .schemas import (
    COMMANDS,
    CountReport,
    DescentReport,
    FamilyInput,
    HNReport,
    InstanceInput,
    RunConfig,
    RunReport,
    SuiteReport,
    WeightsReport,
)
from .services import adelic
from .services.linalg import format_rational, parse_rational
from .services.polytope import PositiveOrthogonalFamily, hn_point, validate_family
from .services.rootdata import Levi, Parabolic, make_group
from .services.suites import run_identities
from .services.weights import weights_report

try:
    import psutil
    PSUTIL_AVAILABLE = True
except ImportError:
    PSUTIL_AVAILABLE = False

try:
    import resource
except ImportError:
    resource = None

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2

DEFAULT_SL2_XIS = (("1/3", "-1/3"), ("1/2", "-1/2"), ("7/4", "-7/4"))


# ========================
# Input loading
# ========================

def _load_json(path: Optional[str]) -> dict:
    if not path:
        raise InputError("This command needs --input FILE")
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise InputError(f"Input file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"Input file is not valid JSON: {e}") from e


def family_from_input(data: FamilyInput) -> PositiveOrthogonalFamily:
    group = make_group(data.n)
    levi = Levi.of([[i - 1 for i in block] for block in data.levi])
    points = {
        Parabolic.from_key(key): [parse_rational(x) for x in coords]
        for key, coords in data.points.items()
    }
    f = PositiveOrthogonalFamily.build(group, levi, points)
    validate_family(f)
    return f


def datum_from_input(data: InstanceInput) -> adelic.CharDatum:
    return adelic.build_char(
        data.q,
        [(str(place), int(mult)) for place, mult in data.D],
        lam=data.lam,
        lam2=data.lam2,
        companion=data.companion,
    )


def _xis(config: RunConfig, listed: List[List[str]], single: Optional[List[str]] = None,
         default=()) -> List[List[str]]:
    if config.xi:
        return [config.xi]
    if listed:
        return listed
    if single:
        return [single]
    if default:
        return [list(xi) for xi in default]
    raise InputError("No xi given: use --xi or an xi/xis field in the input")


def _vector(xi: List[str]) -> tuple:
    return tuple(parse_rational(x) for x in xi)


def _fmt(xi) -> List[str]:
    return [format_rational(x) for x in xi]


# ========================
# Commands
# ========================

def cmd_identities(config: RunConfig) -> Tuple[int, SuiteReport]:
    report = SuiteReport(**run_identities(config.seed, config.cases, config.samples))
    return (EXIT_OK if report.passed else EXIT_FAILED), report


def cmd_hn(config: RunConfig) -> Tuple[int, List[HNReport]]:
    data = FamilyInput.model_validate(_load_json(config.input_path))
    f = family_from_input(data)
    out = []
    for xi in _xis(config, data.xis, data.xi):
        result = hn_point(f, _vector(xi))
        out.append(HNReport(xi=_fmt(_vector(xi)), **result.to_json()))
    return EXIT_OK, out


def cmd_weights(config: RunConfig) -> Tuple[int, List[WeightsReport]]:
    data = FamilyInput.model_validate(_load_json(config.input_path))
    f = family_from_input(data)
    out = []
    for xi in _xis(config, data.xis, data.xi):
        out.append(WeightsReport(xi=_fmt(_vector(xi)), **weights_report(f, _vector(xi))))
    return EXIT_OK, out


def cmd_count(config: RunConfig) -> Tuple[int, CountReport]:
    data = InstanceInput.model_validate(_load_json(config.input_path))
    c = datum_from_input(data)
    window = data.window
    xis = [_vector(xi) for xi in _xis(config, data.xis, default=DEFAULT_SL2_XIS)]

    direct, formula, w_forms, v_forms = [], [], [], []
    for xi in xis:
        direct.append(adelic.fiber_count_direct(c, xi, window))
        w_form, v_form = adelic.formula_forms(c, xi, window)
        w_forms.append(w_form)
        v_forms.append(v_form)
        formula.append(w_form)

    bounds_ok = True
    orbits = 1
    if c.is_split:
        orbits = len(adelic.orbit_representatives(c, window))
        for xi in xis:
            bounds_ok = bounds_ok and all(adelic.gl2_bound_check(pt) for pt in adelic.fiber_points(c, xi, window))

    report = CountReport(
        instance=c.to_json(),
        xis=[_fmt(xi) for xi in xis],
        direct=_fmt(direct),
        formula=_fmt(formula),
        w_form=_fmt(w_forms),
        v_form=_fmt(v_forms),
        orbits=orbits,
        xi_independent=len(set(direct) | set(formula)) == 1,
        bounds_ok=bounds_ok,
    )
    if direct != formula:
        raise ConsistencyError(f"Direct counts {report.direct} != formula {report.formula}")
    if w_forms != v_forms:
        raise ConsistencyError(f"w-form {report.w_form} != v-form {report.v_form}")
    if not report.xi_independent:
        raise ConsistencyError(f"Count depends on xi: {report.direct}")
    if not bounds_ok:
        raise ConsistencyError("An assembled family violates 0 <= x_alpha <= 2 deg D")
    return EXIT_OK, report


def cmd_descent(config: RunConfig) -> Tuple[int, DescentReport]:
    data = InstanceInput.model_validate(_load_json(config.input_path))
    c = datum_from_input(data)
    results = {Q: adelic.descent_check(c, Q, data.window) for Q in (adelic.B, adelic.B_BAR)}
    for Q, (lhs, rhs) in results.items():
        if lhs != rhs:
            raise ConsistencyError(f"Descent fails for {Q}: J^Q_T = {lhs}, expected {rhs}")
    spot_checks = adelic.vmq_vml_spot_check(c, window=data.window)
    lhs, rhs = results[adelic.B]
    report = DescentReport(
        instance=c.to_json(),
        parabolic=adelic.B.key,
        lhs=format_rational(lhs),
        rhs=format_rational(rhs),
        torus_side=format_rational(adelic.torus_side(c)),
        factor=c.q ** c.deg_D,
        spot_checks=spot_checks,
    )
    return EXIT_OK, report


HANDLERS = {
    "identities": cmd_identities,
    "hn": cmd_hn,
    "weights": cmd_weights,
    "count": cmd_count,
    "descent": cmd_descent,
}


# ========================
# Runner
# ========================

def _peak_rss_mb() -> Optional[float]:
    """High-water mark of the resident set, or None where the platform has no such counter."""
    if resource is not None:
        peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        # ru_maxrss is in bytes on macOS, in KiB elsewhere
        return round(peak / (1024 * 1024 if sys.platform == "darwin" else 1024), 1)
    if PSUTIL_AVAILABLE:
        peak = getattr(psutil.Process().memory_info(), "peak_wset", None)
        if peak is not None:
            return round(peak / (1024 * 1024), 1)
    return None


def run(config: RunConfig) -> Tuple[int, RunReport]:
    """Execute one command; never raises for input or identity failures."""
    started = time.perf_counter()
    result = None
    error = None
    try:
        code, result = HANDLERS[config.command](config)
    except (InputError, ValidationError) as e:
        logger.error(f"Input error: {e}")
        code, error = EXIT_INPUT, str(e)
    except ConsistencyError as e:
        logger.error(f"Identity failed: {e}")
        code, error = EXIT_FAILED, str(e)
    except HitchinError as e:
        logger.error(f"{config.command} failed: {e}")
        code, error = EXIT_FAILED, str(e)

    report = RunReport(
        command=config.command,
        config=config.model_dump(),
        settings=settings.as_dict(),
        result=result,
        error=error,
        exit_code=code,
        elapsed_seconds=round(time.perf_counter() - started, 3),
        peak_rss_mb=_peak_rss_mb(),
    )
    return code, report


def render_json(report: RunReport) -> str:
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)


def render_text(report: RunReport) -> str:
    lines = [f"{report.command}: exit {report.exit_code} ({report.elapsed_seconds}s)"]
    if report.error:
        lines.append(f"  error: {report.error}")
    result = report.result
    if isinstance(result, SuiteReport):
        for name, section in result.sections.items():
            status = "ok" if not section.failures else f"{len(section.failures)} failed"
            lines.append(f"  {name:<11} cases={section.cases:<4} checks={section.checks:<7} {status}")
    elif isinstance(result, list):
        for item in result:
            lines.append("  " + ", ".join(f"{k}={v}" for k, v in item.model_dump().items()))
    elif result is not None:
        for k, v in result.model_dump().items():
            lines.append(f"  {k}: {v}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m app.main",
        description="Exact checks of xi-stability polytopes, Arthur weights and Hitchin counts",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s identities --seed 7 --cases 100
  %(prog)s hn --input data/segment_family.json --xi 5/2 -5/2
  %(prog)s count --input data/split_q3.json --json
        """,
    )
    parser.add_argument("command", choices=COMMANDS, help="What to run")
    parser.add_argument("--input", "-i", dest="input_path", help="Family or instance JSON file")
    parser.add_argument("--seed", type=int, default=settings.SEED,
                        help=f"Seed of the randomized suites (default: {settings.SEED})")
    parser.add_argument("--cases", type=int, default=settings.CASES,
                        help=f"Number of random cases (default: {settings.CASES})")
    parser.add_argument("--samples", type=int, default=None,
                        help=f"Random points per family in the polytope checks (default: {settings.HULL_SAMPLES})")
    parser.add_argument("--json", dest="json_out", action="store_true", help="Print the JSON report")
    parser.add_argument("--out", "-o", dest="out_path", metavar="FILE", help="Also write the JSON report to FILE")
    parser.add_argument("--xi", nargs="+", metavar="P/Q", help="Stability parameter (trace zero)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    try:
        config = RunConfig(**vars(args))
    except ValidationError as e:
        logger.error(f"Bad arguments: {e}")
        return EXIT_INPUT
    code, report = run(config)
    text = render_json(report)
    if config.out_path:
        Path(config.out_path).write_text(text + "\n")
        logger.info(f"Report written to {config.out_path}")
    print(text if config.json_out else render_text(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
