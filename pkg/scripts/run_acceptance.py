#!/usr/bin/env python3
"""Run the end-to-end acceptance cases through the CLI and check determinism.

Each case is run twice into separate directories; the artifacts of both
runs must validate and be byte-identical.
"""

import argparse
import logging
import math
import sys
import tempfile
from pathlib import Path
from typing import Dict, List, Tuple

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from compare_runs import compare_runs
from main import run
from validate_artifacts import validate_artifacts

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

SQRT = '{"kind": "power", "L": 1.0, "alpha": 0.5}'
LOG_RECIPROCAL = '{"kind": "log_reciprocal", "L": 1.0}'


class AcceptanceRunner:
    """Runs named CLI cases and checks their artifacts."""

    def __init__(self, work_dir: str, quick: bool = False):
        """Initialize runner.

        Args:
            work_dir: Directory receiving one sub-directory per run
            quick: Use smaller sizes (N = 10^3, grid_n = 1024)
        """
        self.work_dir = Path(work_dir)
        self.quick = quick

    def cases(self) -> Dict[str, List[str]]:
        """CLI argument lists per case, without --out."""
        terms = "1000" if self.quick else "10000"
        grid_n = "1024" if self.quick else "4096"
        return {
            "counterexample": ["counterexample", "--alpha", "0.5", "--beta", "1", "--terms", terms],
            "construct_sqrt": ["construct", "--omega", SQRT, "--omega-prime", SQRT, "--sup-norm", "1"],
            "construct_log": ["construct", "--omega", SQRT, "--omega-prime", LOG_RECIPROCAL,
                              "--sup-norm", repr(1.0 / math.log(math.e + 1.0)),
                              "--stop-x", "1e-4", "--grid-n", grid_n],
        }

    def run_case(self, name: str, argv: List[str]) -> Tuple[bool, str]:
        """Run a case twice; True if both runs pass and agree."""
        dirs = []
        for attempt in ("a", "b"):
            out = self.work_dir / f"{name}_{attempt}"
            code = run(argv + ["--out", str(out)])
            if code != 0:
                return False, f"exit code {code} on run {attempt}"
            if not validate_artifacts(str(out)):
                return False, f"invalid artifacts on run {attempt}"
            dirs.append(str(out))

        results = compare_runs(*dirs)
        if results['different'] or results['only_a'] or results['only_b']:
            return False, f"runs differ: {results['different'] + results['only_a'] + results['only_b']}"
        return True, "ok"

    def run_all(self) -> Dict[str, Tuple[bool, str]]:
        results = {}
        for name, argv in self.cases().items():
            logger.info(f"Running acceptance case {name}...")
            results[name] = self.run_case(name, argv)
            passed, detail = results[name]
            log = logger.info if passed else logger.error
            log(f"  {name}: {'passed' if passed else 'FAILED'} ({detail})")
        return results


def main():
    """Main function to run the acceptance cases."""
    parser = argparse.ArgumentParser(description="Run bvkit acceptance cases through the CLI")
    parser.add_argument(
        "--work-dir",
        help="Directory for run outputs (default: a temporary directory)"
    )
    parser.add_argument(
        "--quick",
        action="store_true",
        help="Use reduced sizes"
    )

    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        runner = AcceptanceRunner(args.work_dir or tmp, quick=args.quick)
        results = runner.run_all()

    failed = [name for name, (passed, _) in results.items() if not passed]
    if failed:
        logger.error(f"❌ {len(failed)} acceptance case(s) failed: {', '.join(failed)}")
        return 1

    logger.info(f"✅ All {len(results)} acceptance cases passed and are deterministic")
    return 0


if __name__ == "__main__":
    sys.exit(main())
