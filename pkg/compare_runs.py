#!/usr/bin/env python3
"""Compare two bvkit run directories artifact by artifact."""

import hashlib
import sys
from pathlib import Path
from typing import Dict, List


def hash_artifacts(run_dir: str) -> Dict[str, str]:
    """SHA-256 of every CSV/JSON artifact, keyed by file name."""
    return {
        path.name: hashlib.sha256(path.read_bytes()).hexdigest()
        for path in sorted(Path(run_dir).iterdir())
        if path.suffix in (".csv", ".json")
    }


def first_difference(a: Path, b: Path) -> str:
    """Line number and both versions of the first differing line."""
    lines_a = a.read_text().splitlines()
    lines_b = b.read_text().splitlines()
    for number, (left, right) in enumerate(zip(lines_a, lines_b), start=1):
        if left != right:
            return f"line {number}: {left[:60]!r} != {right[:60]!r}"
    return f"length {len(lines_a)} != {len(lines_b)} lines"


def compare_runs(run_a: str, run_b: str) -> Dict[str, List[str]]:
    """Compare two run directories.

    Returns:
        Dictionary with 'identical', 'different', 'only_a' and 'only_b' file names
    """
    print("=" * 80)
    print("COMPARING RUN DIRECTORIES")
    print("=" * 80)
    print(f"\nRun A: {run_a}")
    print(f"Run B: {run_b}")

    hashes_a = hash_artifacts(run_a)
    hashes_b = hash_artifacts(run_b)

    common = sorted(set(hashes_a) & set(hashes_b))
    identical = [name for name in common if hashes_a[name] == hashes_b[name]]
    different = [name for name in common if hashes_a[name] != hashes_b[name]]
    only_a = sorted(set(hashes_a) - set(hashes_b))
    only_b = sorted(set(hashes_b) - set(hashes_a))

    print(f"\nArtifacts in A: {len(hashes_a)}")
    print(f"Artifacts in B: {len(hashes_b)}")
    print(f"Byte-identical: {len(identical)}")

    if different:
        print("\n" + "=" * 80)
        print("DIFFERING ARTIFACTS:")
        print("=" * 80)
        for name in different:
            print(f"  {name}: {first_difference(Path(run_a) / name, Path(run_b) / name)}")

    for label, names in (("ONLY IN A", only_a), ("ONLY IN B", only_b)):
        if names:
            print("\n" + "=" * 80)
            print(f"{label}:")
            print("=" * 80)
            for name in names:
                print(f"  {name}")

    print("\n" + "=" * 80)
    print("SUMMARY:")
    print("=" * 80)
    if different or only_a or only_b:
        print("❌ Runs differ")
    else:
        print("✅ Runs are byte-identical")

    return {
        'identical': identical,
        'different': different,
        'only_a': only_a,
        'only_b': only_b
    }


if __name__ == "__main__":
    if len(sys.argv) != 3:
        print("Usage: python compare_runs.py <run_dir_a> <run_dir_b>")
        sys.exit(1)

    results = compare_runs(sys.argv[1], sys.argv[2])
    sys.exit(0 if not (results['different'] or results['only_a'] or results['only_b']) else 1)
