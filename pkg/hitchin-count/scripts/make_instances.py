#!/usr/bin/env python3

"""
hitchin-count sample inputs
===========================

Writes the family and spectral-data JSON files used by the command line
and the tests into a data directory.

Usage:
    python make_instances.py                 # Write every sample into ./data
    python make_instances.py --list          # List the samples
    python make_instances.py --only split_q3 --force

Samples:
    - segment_family        SL(2) family with hull [0, 3] alpha^vee
    - rank2_family          SL(3) hexagon (orbit of 2 rho^vee)
    - split_q3              q=3, D=(t), lambda=(t+1)/t, count 1
    - split_q5_two_places   q=5, D=(t)+(t+1), count 10
    - split_q3_deg2         q=3, D=2(t), lambda=(t^2+1)/t^2, count 8
    - elliptic_q3           q=3, u^2+1 irreducible, count 1/4
    - gl2_q2                GL(2) descent instance, lambda2=0
"""

import argparse
import json
import os
import sys
from pathlib import Path

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from app.schemas import FamilyInput, InstanceInput  # noqa: E402

DATA_DIR = Path(os.path.join(os.path.dirname(__file__), '..', 'data'))

# Sample information
SAMPLES = {
    "segment_family": {
        "schema": FamilyInput,
        "description": "SL(2) segment [0, 3] alpha^vee",
        "data": {
            "n": 2,
            "levi": [[1], [2]],
            "points": {"1|2": ["3", "-3"], "2|1": ["0", "0"]},
            "xis": [["5", "-5"], ["1/2", "-1/2"], ["-2", "2"]],
        },
    },
    "rank2_family": {
        "schema": FamilyInput,
        "description": "SL(3) hexagon with vertices the permutations of (2, 0, -2)",
        "data": {
            "n": 3,
            "levi": [[1], [2], [3]],
            "points": {
                "1|2|3": ["2", "0", "-2"],
                "1|3|2": ["2", "-2", "0"],
                "2|1|3": ["0", "2", "-2"],
                "2|3|1": ["-2", "2", "0"],
                "3|1|2": ["0", "-2", "2"],
                "3|2|1": ["-2", "0", "2"],
            },
            "xis": [["1/3", "1/6", "-1/2"]],
        },
    },
    "split_q3": {
        "schema": InstanceInput,
        "description": "split, one place of degree 1, count 1",
        "data": {"q": 3, "D": [["t", 1]], "lambda": "(t+1)/t"},
    },
    "split_q5_two_places": {
        "schema": InstanceInput,
        "description": "split, two places of degree 1, count 10",
        "data": {"q": 5, "D": [["t", 1], ["t+1", 1]], "lambda": "(t+2)*(t+3)/(t*(t+1))"},
    },
    "split_q3_deg2": {
        "schema": InstanceInput,
        "description": "split, D = 2(t), discriminant supported on t^2+1, count 8",
        "data": {"q": 3, "D": [["t", 2]], "lambda": "(t^2+1)/t^2", "window": 2},
    },
    "elliptic_q3": {
        "schema": InstanceInput,
        "description": "elliptic u^2 + 1 over F_3, D = 0, count 1/4",
        "data": {"q": 3, "companion": [0, 1]},
    },
    "gl2_q2": {
        "schema": InstanceInput,
        "description": "GL(2) descent instance with lambda2 = 0",
        "data": {"q": 2, "D": [["t", 1]], "lambda": "(t+1)/t", "lambda2": "0"},
    },
}


def write_sample(name: str, out_dir: Path, force: bool = False) -> bool:
    """Validate one sample against its schema and write it; skip existing files unless forced."""
    if name not in SAMPLES:
        print(f"Error: Unknown sample '{name}'")
        list_samples()
        return False

    info = SAMPLES[name]
    info["schema"].model_validate(info["data"])
    path = out_dir / f"{name}.json"
    if path.exists() and not force:
        print(f"Sample already exists: {path} (use --force to overwrite)")
        return True

    path.write_text(json.dumps(info["data"], indent=2) + "\n")
    print(f"Wrote {path}")
    return True


def list_samples():
    print("\nAvailable samples:")
    print("=" * 70)
    for name, info in SAMPLES.items():
        print(f"  {name:<22} {info['description']}")
    print()


def main():
    parser = argparse.ArgumentParser(
        description="Write the sample inputs of hitchin-count",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s                       Write every sample into ./data
  %(prog)s --list                List the samples
  %(prog)s --only split_q3 -f    Rewrite one sample
        """
    )
    parser.add_argument("--out", "-o", default=str(DATA_DIR), help="Output directory")
    parser.add_argument("--only", action="append", metavar="NAME", help="Write only this sample (repeatable)")
    parser.add_argument("--list", "-l", action="store_true", help="List the samples")
    parser.add_argument("--force", "-f", action="store_true", help="Overwrite existing files")
    args = parser.parse_args()

    if args.list:
        list_samples()
        return 0

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = args.only or list(SAMPLES)
    ok = all([write_sample(name, out_dir, args.force) for name in names])
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
