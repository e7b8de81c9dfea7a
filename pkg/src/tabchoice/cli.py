"""Command-line front end: ``tabchoice {hash,simulate,analyze,oracle,adversary}``.

Exit codes: 0 success, 1 structural violation (or violated counting bound),
2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dependency as dep
from .adversary import AdversarialSpec, adversary_config, adversary_spec, generate_adversarial_keys
from .allocator import SCHEMES, AllocationConfig, ConfigError, default_spec
from .harness import (
    ExperimentConfig, read_traces, run_experiment, run_trial, summarize, summary_path, write_records,
    write_traces,
)
from .hashgraph import build_graph, components, verify_structural_dichotomy
from .tabulation import CharSpec, DomainError, build_tables, hash_key

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def parse_int(text: str) -> int:
    return int(text, 0)


def read_keys(source: str) -> list[int]:
    """Keys from a file (one per line) or an inline comma/space separated list."""
    path = Path(source)
    text = path.read_text() if path.exists() else source
    return [int(tok, 0) for tok in text.replace(",", " ").split()]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=parse_int, default=0, help="master seed (u64)")
    p.add_argument("--threads", type=int, default=1, help="worker processes for independent trials")
    p.add_argument("--out", type=Path, default=None, help="output path (JSON lines; CSV summary alongside)")
    return p


def _spec_args(p: argparse.ArgumentParser, c: int | None = 2, q: int | None = None) -> None:
    p.add_argument("--c", type=int, default=c, help="characters per key")
    p.add_argument("--q", type=int, default=q, help="bits per character")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="tabchoice", description="Simple tabulation hashing and two-choice balls-into-bins experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hash", parents=[common], help="hash keys with simple tabulation")
    _spec_args(p, q=8)
    p.add_argument("--r", type=int, default=16, help="output bits")
    p.add_argument("--keys", required=True, help="file with one key per line, or inline list")

    p = sub.add_parser("simulate", parents=[common], help="run two-choice allocation trials")
    p.add_argument("--n", type=parse_int, required=True, help="bins per table (power of two)")
    p.add_argument("--m", type=parse_int, default=None, help="balls (default n)")
    p.add_argument("--scheme", choices=SCHEMES, default="tabulation")
    _spec_args(p)
    p.add_argument("--rig-k", type=int, default=2, help="characters equalized per table (rigged-tabulation only)")
    p.add_argument("--trials", type=int, default=1, help="independent trials, seeded from --seed")
    p.add_argument("--keys", default=None, help="explicit key list (file or inline)")
    p.add_argument("--checks", default="lemma32,obs41", help="comma list of lemma32,obs41,inductive or 'none'")
    p.add_argument("--traces", type=Path, default=None, help="also write full run traces as JSON lines")
    p.add_argument("--no-timing", action="store_true", help="write ms=0 so output is byte-reproducible")

    p = sub.add_parser("analyze", parents=[common], help="structural analysis of stored traces")
    p.add_argument("--trace", type=Path, required=True, help="trace file written by simulate --traces")
    p.add_argument("--check-lemmas", action="store_true", help="also run the inductive binomial-tree check")
    p.add_argument("--top", type=int, default=10, help="components listed per trace")

    p = sub.add_parser("oracle", parents=[common], help="exact tuple counts against their bounds")
    _spec_args(p, q=2)
    p.add_argument("--universe", default="all", help="'all' or a key file")
    osub = p.add_subparsers(dest="oracle", required=True)
    z = osub.add_parser("zero-sum", help="t-tuples of pairs with XOR-empty position characters")
    z.add_argument("--t", type=int, required=True, help="number of key pairs")
    d = osub.add_parser("dependent", help="s-tuples of keys containing a dependent subset")
    d.add_argument("--s", type=int, required=True, help="tuple length (>= 3)")

    p = sub.add_parser("adversary", parents=[common], help="lower-bound key set, optionally rigged")
    p.add_argument("--n-bins", type=parse_int, required=True, help="bins per table; also the number of keys")
    p.add_argument("--k", type=int, default=2, help="characters used at positions 1..c-1")
    _spec_args(p)
    p.add_argument("--trials", type=int, default=1, help="independent trials, seeded from --seed")
    p.add_argument("--rigged", action="store_true", help="force the collision event in the tables")
    p.add_argument("--order", choices=("lexicographic", "numeric"), default="lexicographic",
                   help="insertion order of the keys")
    p.add_argument("--no-timing", action="store_true", help="write ms=0 so output is byte-reproducible")
    return parser


def cmd_hash(args) -> int:
    spec = CharSpec(args.c, args.q, args.r)
    tables = build_tables(spec, args.seed)
    width = (spec.r + 3) // 4
    lines = [f"{key:#x},{hash_key(tables, key):#0{width + 2}x}" for key in read_keys(args.keys)]
    _emit(lines, args.out)
    return EXIT_OK


def _emit(lines: list[str], out: Path | None) -> None:
    text = "\n".join(lines) + ("\n" if lines else "")
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _checks(text: str) -> frozenset[str]:
    if text.strip().lower() in ("", "none"):
        return frozenset()
    return frozenset(t.strip() for t in text.split(",") if t.strip())


def _report(summary, out: Path | None) -> None:
    sys.stdout.write(summary.to_csv())
    if out is not None:
        print(f"records: {out}  summary: {summary_path(out)}", file=sys.stderr)


def cmd_simulate(args) -> int:
    m = args.n if args.m is None else args.m
    spec = None
    if args.scheme != "fully-random":
        spec = default_spec(args.n, m, args.c)
        if args.q is not None:
            spec = CharSpec(args.c, args.q, spec.r)
    base = AllocationConfig(n=args.n, m=m, scheme=args.scheme, spec=spec, rig_k=args.rig_k)
    keys = tuple(read_keys(args.keys)) if args.keys else None
    config = ExperimentConfig(
        trials=args.trials, base=base, checks=_checks(args.checks), out=args.out, seed=args.seed,
        threads=args.threads, timing=not args.no_timing, keys=keys,
    )
    if args.traces is not None:
        pairs = [run_trial(base, i, config.trial_seed(i), config.checks, keys, config.timing)
                 for i in range(config.trials)]
        records = [r for r, _ in pairs]
        write_traces(args.traces, (t for _, t in pairs))
        if args.out is not None:
            write_records(args.out, records)
            summary_path(args.out).write_text(summarize(records).to_csv())
        summary = summarize(records)
    else:
        summary = run_experiment(config)
    _report(summary, args.out)
    return EXIT_VIOLATION if summary.violations else EXIT_OK


def cmd_analyze(args) -> int:
    failed = False
    for i, trace in enumerate(read_traces(args.trace)):
        graph = build_graph(trace)
        comps = sorted(components(graph, include_isolated=False), key=lambda c: (-c.size, c.label))
        print(f"# trace {i}: scheme={trace.config.scheme} n={trace.n} m={trace.m} seed={trace.config.seed}")
        print(f"components (non-trivial): {len(comps)}")
        print("size,edges,excess")
        for comp in comps[: args.top]:
            print(f"{comp.size},{comp.edges},{comp.excess}")
        rep = verify_structural_dichotomy(trace, graph, inductive=args.check_lemmas)
        print(f"max_load={rep.max_load} bin={rep.bin} component_size={rep.component_size} "
              f"a={rep.arboricity_bound} |V_0|={rep.v0}")
        print("level,|V_l|,|E_l|,a_l")
        for level, (nv, ne, a) in enumerate(rep.profile):
            print(f"{level},{nv},{ne},{a}")
        if rep.double_cycle_edges is not None:
            print(f"double_cycle_edges={rep.double_cycle_edges} target={rep.double_cycle_target}"
                  + (" FLAG" if rep.double_cycle_flag else ""))
        print(f"lemma32: {'pass' if rep.lemma32 else 'FAIL'}")
        print(f"obs41: {'pass' if rep.obs41 else 'FAIL'}"
              + ("" if rep.binomial_found is None else f" (B_{rep.k} found={rep.binomial_found})")
              + (" (excess component)" if rep.has_excess else ""))
        if rep.inductive is not None:
            print(f"inductive: {'pass' if rep.inductive else 'FAIL'}")
        for v in rep.violations:
            print(f"VIOLATION: {v}")
        failed |= not rep.ok
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_oracle(args) -> int:
    spec = CharSpec(args.c, args.q, 1)
    universe = dep.full_universe(spec) if args.universe == "all" else read_keys(args.universe)
    universe = list(dict.fromkeys(universe))
    n = len(universe)
    if args.oracle == "zero-sum":
        count = dep.count_zero_sum_tuples(universe, args.t, spec)
        bound = dep.zero_sum_bound(n, args.t, spec.c)
        label = f"zero-sum t={args.t}"
    else:
        count = dep.count_dependent_tuples(universe, args.s, spec)
        bound = dep.dependent_tuple_bound(n, args.s, spec.c)
        label = f"dependent s={args.s}"
    ok = count <= bound
    print(f"{label} c={spec.c} q={spec.q} |X|={len(universe)} count={count} bound={bound:g} {'ok' if ok else 'VIOLATED'}")
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_adversary(args) -> int:
    aspec = AdversarialSpec(n=args.n_bins, k=args.k, spec=adversary_spec(args.n_bins, args.k, args.c, args.q))
    base = adversary_config(aspec, args.n_bins, args.seed, args.rigged)
    keys = tuple(generate_adversarial_keys(aspec, args.order))
    label = "adversary-rigged" if args.rigged else "adversary-unrigged"
    config = ExperimentConfig(
        trials=args.trials, base=base, checks=frozenset({"lemma32", "obs41"}), out=args.out, seed=args.seed,
        threads=args.threads, timing=not args.no_timing, keys=keys, label=label,
    )
    summary = run_experiment(config)
    _report(summary, args.out)
    return EXIT_VIOLATION if summary.violations else EXIT_OK


COMMANDS = {
    "hash": cmd_hash, "simulate": cmd_simulate, "analyze": cmd_analyze,
    "oracle": cmd_oracle, "adversary": cmd_adversary,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError, dep.CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
