"""Pilot run of max load at n = m = 2^20 for the three allocation schemes.

Used to sanity-check the acceptance windows before freezing them.

    python scripts/pilot_max_load.py --trials 30 --lg-n 20
"""

import argparse
import math
import time

from tabchoice.allocator import AllocationConfig, default_spec
from tabchoice.harness import ExperimentConfig, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--lg-n", type=int, default=20)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--checks", action="store_true", help="run the structural checks too")
    args = ap.parse_args()
    n = 1 << args.lg_n
    print(f"n = m = 2^{args.lg_n}, lg lg n = {math.log2(args.lg_n):.3f}")
    for scheme in ("fully-random", "tabulation", "one-choice"):
        spec = None if scheme == "fully-random" else default_spec(n, n)
        base = AllocationConfig(n=n, m=n, scheme=scheme, spec=spec)
        checks = frozenset({"lemma32", "obs41"}) if args.checks else frozenset()
        start = time.perf_counter()
        s = run_experiment(ExperimentConfig(args.trials, base, checks=checks, seed=args.seed)).only()
        took = time.perf_counter() - start
        print(f"{scheme:>13}: mean {s.mean:.3f} median {s.median} range [{s.min}, {s.max}] "
              f"hist {s.histogram} violations {s.violations} ({took:.1f}s)")


if __name__ == "__main__":
    main()
