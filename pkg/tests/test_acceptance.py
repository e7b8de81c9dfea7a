"""End-to-end acceptance suite.

Each test prints a single ``[criterion N] PASS|FAIL`` line with the measured
quantities, then asserts the criterion (and its runtime budget).  Run with
``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import math
import random
import statistics
import time

import numpy as np
import pytest

from tabchoice.adversary import AdversarialSpec, rigging_collapses, run_adversary
from tabchoice.allocator import AllocationConfig, default_spec, place_all, max_load_bin
from tabchoice.dependency import (
    count_dependent_tuples, count_zero_sum_tuples, dependent_tuple_bound, full_universe,
    symmetric_difference, zero_sum_bound,
)
from tabchoice.harness import ExperimentConfig, run_records, summarize
from tabchoice.hashgraph import arboricity_lower_bound, brute_force_arboricity, extract_load_graph
from tabchoice.tabulation import CharSpec, build_tables, derive_seed

MASTER = 20240601
LG_N_LARGE = 20
VERDICTS: list[str] = []  # echoed in the terminal summary by conftest.py


def verdict(number: int, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    ok_all = ok and elapsed < budget
    status = "PASS" if ok_all else "FAIL"
    line = f"[criterion {number}] {status}: {detail} ({elapsed:.1f}s, budget {budget:.0f}s)"
    VERDICTS.append(line)
    print("\n" + line)
    assert ok, detail
    assert elapsed < budget, f"criterion {number} took {elapsed:.1f}s (budget {budget}s)"


def xor_fold(rows: list[list[int]], key: int, q: int) -> int:
    """Independent reference: XOR of one table entry per character, written from scratch."""
    acc = 0
    for i, row in enumerate(rows):
        acc ^= row[(key >> (i * q)) % (1 << q)]
    return acc


def test_01_xor_composition():
    start = time.perf_counter()
    rng = random.Random(MASTER)
    specs = [CharSpec(1, 12, 32), CharSpec(2, 8, 24), CharSpec(4, 8, 64)]
    pairs = mismatches = 0
    for spec in specs:
        for _ in range(200):  # 200 seeds x 3 specs x ~167 keys ~ 10^5 pairs
            seed = rng.getrandbits(64)
            t = build_tables(spec, seed)
            keys = [rng.randrange(spec.universe) for _ in range(167)]
            fast = t.hash_many(keys).tolist()
            rows = t.tables.tolist()
            for key, h in zip(keys, fast):
                ref = xor_fold(rows, key, spec.q)
                mismatches += (h != ref) + (t(key) != ref)
                pairs += 1
    elapsed = time.perf_counter() - start
    verdict(1, pairs >= 100_000 and mismatches == 0,
            f"{pairs} (seed, key) pairs, {mismatches} mismatches", elapsed, 5)


def even_multiplicity_set(rng: random.Random, spec: CharSpec) -> list[int]:
    """Union of random 'boxes' (all 2^c combinations of two values per position) and repeated keys."""
    keys: list[int] = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.6:
            choices = [rng.sample(range(spec.alphabet), 2) if rng.random() < 0.8 else [rng.randrange(spec.alphabet)] * 2
                       for _ in range(spec.c)]
            for mask in range(1 << spec.c):
                keys.append(sum(choices[i][(mask >> i) & 1] << (i * spec.q) for i in range(spec.c)))
        else:
            x = rng.randrange(spec.universe)
            keys += [x] * (2 * rng.randint(1, 2))
    rng.shuffle(keys)
    return keys


def test_02_dependency_converse():
    start = time.perf_counter()
    rng = random.Random(MASTER + 2)
    spec = CharSpec(3, 6, 32)
    tables = [build_tables(spec, derive_seed(MASTER, s)) for s in range(10)]
    bad_sets = nonzero = 0
    for _ in range(10_000):
        keys = even_multiplicity_set(rng, spec)
        bad_sets += bool(symmetric_difference(keys, spec))
        arr = np.asarray(keys, dtype=np.uint64)
        for t in tables:
            nonzero += int(np.bitwise_xor.reduce(t.hash_many(arr))) != 0
    elapsed = time.perf_counter() - start
    verdict(2, bad_sets == 0 and nonzero == 0,
            f"10^4 sets x 10 seeds: {bad_sets} malformed sets, {nonzero} nonzero XORs", elapsed, 10)


def universes(seed: int, subsets: int = 20) -> list[tuple[str, list[int]]]:
    spec = CharSpec(2, 2, 8)
    full = full_universe(spec)
    rng = random.Random(seed)
    return [("full", full)] + [(f"subset{i}", rng.sample(full, 12)) for i in range(subsets)]


def test_03_zero_sum_bound():
    start = time.perf_counter()
    spec = CharSpec(2, 2, 8)
    worst, cases, full_counts = 0.0, 0, {}
    for name, X in universes(MASTER + 3):
        for t in (2, 3):
            count, bound = count_zero_sum_tuples(X, t, spec), zero_sum_bound(len(X), t, spec.c)
            worst = max(worst, count / bound)
            cases += 1
            if name == "full":
                full_counts[t] = (count, bound)
    elapsed = time.perf_counter() - start
    verdict(3, worst <= 1, f"{cases} cases, max count/bound = {worst:.3f}; full universe {full_counts}",
            elapsed, 60)


def test_04_dependent_tuple_bound():
    start = time.perf_counter()
    spec = CharSpec(2, 2, 8)
    worst, cases, full_counts = 0.0, 0, {}
    for name, X in universes(MASTER + 4):
        for s in (3, 4):
            count, bound = count_dependent_tuples(X, s, spec), dependent_tuple_bound(len(X), s, spec.c)
            worst = max(worst, count / bound)
            cases += 1
            if name == "full":
                full_counts[s] = (count, round(bound))
    elapsed = time.perf_counter() - start
    verdict(4, worst <= 1, f"{cases} cases, max count/bound = {worst:.4f}; full universe {full_counts}",
            elapsed, 120)


@pytest.fixture(scope="module")
def structural_records():
    n = 1 << 14
    cfg = ExperimentConfig(100, AllocationConfig(n=n, m=n, scheme="tabulation"),
                           checks=frozenset({"lemma32", "obs41", "inductive"}), seed=MASTER + 5, timing=False)
    start = time.perf_counter()
    records = run_records(cfg)
    return records, time.perf_counter() - start


def test_05_load_graph_lemma(structural_records):
    records, elapsed = structural_records
    fails = [r.trial for r in records if not r.checks.get("lemma32", False)]
    verdict(5, len(records) == 100 and not fails,
            f"100 tabulation trials at n=m=2^14: {len(fails)} violations {fails[:5]}", elapsed, 120)


def test_06_dichotomy(structural_records):
    records, elapsed = structural_records
    fails = [r.trial for r in records if not r.checks.get("obs41", False)]
    forests = [r for r in records if "inductive" in r.checks]
    ind_fails = [r.trial for r in forests if not r.checks["inductive"]]
    expected_forests = sum(r.largest_excess < 0 for r in records)
    ok = not fails and not ind_fails and len(forests) == expected_forests
    verdict(6, ok, f"{len(fails)} dichotomy violations; inductive witness on {len(forests)} forest runs, "
                   f"{len(ind_fails)} failures", elapsed, 120)


def large_run(scheme: str):
    n = 1 << LG_N_LARGE
    spec = None if scheme == "fully-random" else default_spec(n, n)
    cfg = ExperimentConfig(30, AllocationConfig(n=n, m=n, scheme=scheme, spec=spec), checks=frozenset(),
                           seed=MASTER + 7, timing=False)
    start = time.perf_counter()
    summary = summarize(run_records(cfg)).only()
    return summary, time.perf_counter() - start


@pytest.fixture(scope="module")
def fully_random_summary():
    return large_run("fully-random")


def test_07_two_choice_level(fully_random_summary):
    s, elapsed = fully_random_summary
    lglg = math.log2(LG_N_LARGE)
    ok = 2 <= s.min and s.max <= 7 and lglg - 2 <= s.mean <= lglg + 2
    verdict(7, ok, f"fully-random n=m=2^20 x30: mean {s.mean:.3f} (window [{lglg - 2:.2f}, {lglg + 2:.2f}]), "
                   f"range [{s.min}, {s.max}], histogram {s.histogram}", elapsed, 300)


def test_08_tabulation_matches(fully_random_summary):
    ref, _ = fully_random_summary
    s, elapsed = large_run("tabulation")
    diff = abs(s.mean - ref.mean)
    verdict(8, diff <= 0.5, f"tabulation c=2 q=10 mean {s.mean:.3f} vs fully-random {ref.mean:.3f}: "
                            f"|diff| = {diff:.3f} <= 0.5; histogram {s.histogram}", elapsed, 300)


def test_09_one_choice_separation(fully_random_summary):
    ref, _ = fully_random_summary
    s, elapsed = large_run("one-choice")
    verdict(9, s.mean >= 2 * ref.mean, f"one-choice mean {s.mean:.3f} vs 2 x two-choice {2 * ref.mean:.3f}; "
                                       f"histogram {s.histogram}", elapsed, 180)


def test_10_adversarial_rigging():
    start = time.perf_counter()
    n = 1 << 16
    spec = CharSpec(2, 15, 16)
    aspec = AdversarialSpec(n=n, k=2, spec=spec)
    rigged, unrigged, collapses = [], [], 0
    for i in range(30):
        seed = derive_seed(MASTER + 10, i)
        tr = run_adversary(aspec, n, seed, rigged=True)
        rigged.append(int(tr.final_loads.max()))
        collapses += rigging_collapses(tr, spec)
        unrigged.append(int(run_adversary(aspec, n, seed, rigged=False).final_loads.max()))
    med = statistics.median(unrigged)
    wins = sum(r > med for r in rigged)
    elapsed = time.perf_counter() - start
    verdict(10, wins >= 27 and collapses == 30,
            f"rigged > unrigged median ({med}) in {wins}/30 pairs (need >= 27); collapse held in {collapses}/30; "
            f"rigged {sorted(rigged)}", elapsed, 180)


def test_11_double_cycle_trend():
    start = time.perf_counter()
    frac = {}
    for lg_n in (12, 16):
        n = 1 << lg_n
        cfg = ExperimentConfig(200, AllocationConfig(n=n, m=n // 4), checks=frozenset(), seed=MASTER + 11,
                               timing=False)
        frac[lg_n] = summarize(run_records(cfg)).only().double_cycle_frac
    elapsed = time.perf_counter() - start
    verdict(11, frac[16] <= frac[12], f"double-cycle fraction at m=n/4: 2^12 -> {frac[12]:.3f}, "
                                      f"2^16 -> {frac[16]:.3f}", elapsed, 300)


def test_12_nash_williams():
    start = time.perf_counter()
    rng = random.Random(MASTER + 12)
    checked = violations = tight = 0
    while checked < 500:
        n = rng.choice([2, 4, 8])
        cfg = AllocationConfig(n=n, m=rng.randint(1, 4 * n), scheme=rng.choice(["tabulation", "fully-random"]),
                               seed=rng.getrandbits(64))
        tr = place_all(None, cfg)
        side, b = max_load_bin(tr)
        k = int(tr.final_loads[side, b])
        lg = extract_load_graph(tr, side * n + b, k)
        edges = lg.edges()
        if len(lg.vertex_levels[0]) > 12:
            continue
        bound, exact = arboricity_lower_bound(lg), brute_force_arboricity(edges)
        violations += bound > exact
        tight += bound == exact
        checked += 1
    elapsed = time.perf_counter() - start
    verdict(12, violations == 0, f"{checked} load graphs: {violations} violations, bound tight in {tight}",
            elapsed, 60)
