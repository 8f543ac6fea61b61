#!/usr/bin/env python3
"""Validate a bvkit output directory: every artifact re-parses losslessly."""

import json
import sys
from pathlib import Path
from typing import List

sys.path.insert(0, str(Path(__file__).parent))

from bvkit.errors import BVKitError
from bvkit.models.modulus_spec import ModulusSpec
from bvkit.models.piecewise import PiecewiseLinear
from bvkit.utils.formatters import dumps_json


def _check_anchors(data: dict, errors: List[str]):
    anchors = data.get("anchors", [])
    midpoints = data.get("midpoints", [])
    if not anchors or anchors[0] != 1.0:
        errors.append("anchors.json: anchor sequence must start at 1")
    if any(b >= a for a, b in zip(anchors, anchors[1:])):
        errors.append("anchors.json: anchors are not strictly decreasing")
    if len(midpoints) != max(len(anchors) - 1, 0):
        errors.append(f"anchors.json: {len(midpoints)} midpoints for {len(anchors)} anchors")
    for k, y in enumerate(midpoints):
        if not anchors[k + 1] <= y <= anchors[k]:
            errors.append(f"anchors.json: midpoint {k + 1} = {y!r} outside its anchor interval")


def validate_artifacts(out_dir: str) -> bool:
    """Validate every CSV/JSON artifact in a run directory.

    Args:
        out_dir: Directory written by main.py

    Returns:
        True if every artifact is valid
    """
    print(f"\n{'='*60}")
    print(f"BVKIT ARTIFACT VALIDATION")
    print(f"{'='*60}")
    print(f"Directory: {out_dir}\n")

    errors = []
    warnings = []
    files = sorted(p for p in Path(out_dir).iterdir() if p.suffix in (".csv", ".json"))
    print(f"Artifacts: {len(files)}")

    for path in files:
        text = path.read_text()
        try:
            if path.suffix == ".csv":
                f = PiecewiseLinear.from_csv(text)
                if f.to_csv() != text:
                    errors.append(f"{path.name}: CSV does not round-trip byte for byte")
                    continue
                print(f"✅ {path.name} - {len(f)} breakpoints")
                continue

            data = json.loads(text)
            if dumps_json(data) != text:
                errors.append(f"{path.name}: JSON is not in canonical form")
                continue

            if isinstance(data, dict) and "breakpoints" in data:
                PiecewiseLinear.from_dict(data)
            elif isinstance(data, dict) and "kind" in data:
                ModulusSpec.from_dict(data)
            elif path.name == "anchors.json":
                _check_anchors(data, errors)
            elif path.name in ("diagnostics.json", "failure.json"):
                diagnostics = data.get("diagnostics", data)
                if not diagnostics.get("ok", False):
                    warnings.append(f"{path.name}: run reports a failed verification")
            print(f"✅ {path.name}")

        except (BVKitError, ValueError) as e:
            errors.append(f"{path.name}: {e}")
            print(f"❌ {path.name}")

    if not files:
        warnings.append("No artifacts found")

    # Summary
    print(f"\n{'='*60}")
    if errors:
        print(f"❌ VALIDATION FAILED - {len(errors)} errors found:")
        for i, error in enumerate(errors[:10], 1):
            print(f"   {i}. {error}")
        if len(errors) > 10:
            print(f"   ... and {len(errors) - 10} more errors")
    else:
        print("✅ VALIDATION PASSED - All artifacts round-trip")

    if warnings:
        print(f"\nWarnings ({len(warnings)}):")
        for warning in warnings[:5]:
            print(f"   ⚠️  {warning}")

    print(f"{'='*60}\n")

    return len(errors) == 0


if __name__ == "__main__":
    if len(sys.argv) < 2:
        print("Usage: python validate_artifacts.py <output_dir>")
        sys.exit(1)

    out_dir = sys.argv[1]
    if not Path(out_dir).is_dir():
        print(f"Directory not found: {out_dir}")
        sys.exit(1)

    success = validate_artifacts(out_dir)
    sys.exit(0 if success else 1)
