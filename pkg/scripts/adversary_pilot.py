"""Paired rigged/unrigged runs of the adversarial key set.

    python scripts/adversary_pilot.py --lg-bins 16 --k 2 --trials 30
"""

import argparse
import statistics

from tabchoice.adversary import AdversarialSpec, adversary_spec, rigging_collapses, run_adversary
from tabchoice.allocator import max_load

from tabchoice.tabulation import derive_seed


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--lg-bins", type=int, default=16)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--c", type=int, default=2)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--order", choices=["lexicographic", "numeric"], default="lexicographic")
    args = ap.parse_args()
    n = 1 << args.lg_bins
    aspec = AdversarialSpec(n=n, k=args.k, spec=adversary_spec(n, args.k, args.c))
    rigged, plain, collapsed = [], [], 0
    for i in range(args.trials):
        seed = derive_seed(args.seed, i)
        tr = run_adversary(aspec, n, seed, rigged=True, order=args.order)
        rigged.append(max_load(tr))
        collapsed += rigging_collapses(tr, aspec.spec)
        plain.append(max_load(run_adversary(aspec, n, seed, rigged=False, order=args.order)))
    med = statistics.median(plain)
    print(f"spec {aspec.spec}, order {args.order}")
    print(f"rigged max loads   {sorted(rigged)}")
    print(f"unrigged max loads {sorted(plain)} (median {med})")
    print(f"rigged > median in {sum(r > med for r in rigged)}/{args.trials}; collapse in {collapsed}/{args.trials}")


if __name__ == "__main__":
    main()
