"""Double-cycle (excess component) frequency of the hash graph as n grows.

The graph has 2n vertices and m edges, so m/n < 1 is the subcritical regime
where excess components are rare (roughly O(1/n) per run).  At m = n/4 a few
hundred trials usually see none at all; raise --ratio towards 1 to see any.

    python scripts/double_cycle_trend.py --ratio 0.5 --lg-n 8 10 12 14 --trials 200
"""

import argparse

from tabchoice.allocator import AllocationConfig
from tabchoice.harness import ExperimentConfig, run_records, summarize


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--ratio", type=float, default=0.25, help="m / n")
    ap.add_argument("--lg-n", type=int, nargs="+", default=[8, 10, 12, 14, 16])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--scheme", default="tabulation")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("lg_n,n,m,trials,double_cycle_frac,mean_largest_component")
    for lg_n in args.lg_n:
        n = 1 << lg_n
        m = int(args.ratio * n)
        cfg = ExperimentConfig(args.trials, AllocationConfig(n=n, m=m, scheme=args.scheme), checks=frozenset(),
                               seed=args.seed, timing=False)
        records = run_records(cfg)
        s = summarize(records).only()
        mean_lc = sum(r.largest_component for r in records) / len(records)
        print(f"{lg_n},{n},{m},{args.trials},{s.double_cycle_frac:.4f},{mean_lc:.1f}")


if __name__ == "__main__":
    main()
