"""Run the convergence study for every config in configs/ and print a summary table.

    python3 scripts/run_all_scenarios.py [--out results] [--format both]

Each scenario's reports land in OUT/<config name>/. Exits non-zero if any
scenario has a failing check.
"""
import argparse
import sys
import time
from pathlib import Path

from spinc_immersion.cli import check_doubling, emit, run_scenario
from spinc_immersion.config import load_config

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--configs", type=Path, default=ROOT / "configs")
    ap.add_argument("--out", type=Path, default=ROOT / "results")
    ap.add_argument("--format", choices=("json", "csv", "both"), default="both")
    args = ap.parse_args()

    failed = []
    print(f"{'scenario':<18} {'check':<24} {'finest max':>11} {'ratios':>14}  result")
    for path in sorted(args.configs.glob("*.yaml")):
        cfg = load_config(path)
        check_doubling(cfg.resolutions)
        t0 = time.perf_counter()
        report, code = run_scenario(cfg)
        emit(report, args.out / path.stem, args.format)
        for c in report.checks:
            ratios = "/".join("-" if r is None else f"{r:.2f}" for r in c.ratios)
            print(f"{path.stem:<18} {c.name:<24} {c.levels[-1][1].max:>11.3e} {ratios:>14}  {'pass' if c.passed else 'FAIL'}")
        print(f"{path.stem:<18} {'(wall clock)':<24} {time.perf_counter() - t0:>10.2f}s")
        if code:
            failed.append(path.stem)
    print("all scenarios pass" if not failed else f"failing: {', '.join(failed)}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
