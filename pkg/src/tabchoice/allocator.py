"""Sequential two-choice allocation with a replayable trace.

Balls are placed one at a time into two disjoint tables of ``n`` bins.  Ball
``j`` goes to whichever of its two candidate bins is less loaded, ties going
to table 0.  The trace keeps per-ball choices in numpy arrays; per-bin
placement histories are derived on demand in CSR form.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .tabulation import CharSpec, DomainError, TabulationTables, build_tables, derive_seed

SCHEMES = ("tabulation", "fully-random", "one-choice", "rigged-tabulation")


class ConfigError(ValueError):
    """Inconsistent allocation configuration."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True)
class AllocationConfig:
    n: int
    m: int
    scheme: str = "tabulation"
    spec: CharSpec | None = None
    seed: int = 0
    rig_k: int = 2  # only read by the rigged-tabulation scheme
    tie_rule: str = field(default="prefer table 0", init=False)

    def __post_init__(self) -> None:
        if not is_power_of_two(self.n):
            raise ConfigError(f"n must be a power of two, got {self.n}")
        if self.m < 0:
            raise ConfigError(f"m must be nonnegative, got {self.m}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.uses_tables:
            if self.spec is None:
                object.__setattr__(self, "spec", default_spec(self.n, self.m))
            if 1 << self.spec.r != self.n:
                raise ConfigError(f"2^r = {1 << self.spec.r} must equal n = {self.n}")

    @property
    def uses_tables(self) -> bool:
        return self.scheme in ("tabulation", "one-choice", "rigged-tabulation")

    @property
    def lg_n(self) -> int:
        return self.n.bit_length() - 1

    def with_seed(self, seed: int) -> "AllocationConfig":
        return replace(self, seed=seed)


def default_spec(n: int, m: int, c: int = 2) -> CharSpec:
    """Smallest ``q`` (at least 8) with ``2**(c*q) >= m``, and ``r = lg n``."""
    q = 8
    while (1 << (c * q)) < max(m, 1):
        q += 1
    return CharSpec(c=c, q=q, r=max(n.bit_length() - 1, 1))


class BallRecord(NamedTuple):
    time: int
    key: int
    bin0: int
    bin1: int
    chosen: int
    load_before: tuple[int, int]


@dataclass(frozen=True, eq=False)
class RunTrace:
    """Complete record of one allocation run.

    Vertex ids used by the history arrays are ``side * n + bin``.
    """

    config: AllocationConfig
    keys: np.ndarray
    bin0: np.ndarray
    bin1: np.ndarray
    chosen: np.ndarray
    load_before: np.ndarray  # shape (m, 2)
    final_loads: np.ndarray  # shape (2, n)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def m(self) -> int:
        return len(self.keys)

    def __len__(self) -> int:
        return self.m

    def record(self, j: int) -> BallRecord:
        lb = self.load_before[j]
        return BallRecord(j, int(self.keys[j]), int(self.bin0[j]), int(self.bin1[j]), int(self.chosen[j]),
                          (int(lb[0]), int(lb[1])))

    @property
    def records(self) -> Iterator[BallRecord]:
        return (self.record(j) for j in range(self.m))

    @cached_property
    def placed_vertex(self) -> np.ndarray:
        """Vertex id of the bin each ball was placed in."""
        return np.where(self.chosen == 0, self.bin0, self.n + self.bin1).astype(np.int64)

    @cached_property
    def _history(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.placed_vertex, kind="stable")
        offsets = np.zeros(2 * self.n + 1, dtype=np.int64)
        np.cumsum(self.final_loads.reshape(-1), out=offsets[1:])
        return order, offsets

    def bin_history(self, side: int, b: int) -> np.ndarray:
        """Ordered times of the balls placed in bin ``b`` of table ``side``."""
        self._check_bin(side, b)
        order, offsets = self._history
        v = side * self.n + b
        return order[offsets[v]:offsets[v + 1]]

    def _check_bin(self, side: int, b: int) -> None:
        if side not in (0, 1) or not 0 <= b < self.n:
            raise DomainError(f"bin ({side}, {b}) outside 2 x {self.n} tables")


def hash_functions(config: AllocationConfig) -> tuple[TabulationTables, TabulationTables]:
    """``h_0`` and ``h_1`` built from sub-seeds ``(seed, 0)`` and ``(seed, 1)``."""
    h0 = build_tables(config.spec, derive_seed(config.seed, 0))
    h1 = build_tables(config.spec, derive_seed(config.seed, 1))
    if config.scheme == "rigged-tabulation":
        from .adversary import rig_tables

        h0, h1 = rig_tables(h0, config.rig_k), rig_tables(h1, config.rig_k)
    return h0, h1


def choose_bins(
    keys: np.ndarray,
    config: AllocationConfig,
    tables: tuple[TabulationTables, TabulationTables] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Candidate bins ``(h_0(x), h_1(x))`` of every key under the configured scheme."""
    m = len(keys)
    if config.scheme == "fully-random":
        if tables is not None:
            raise ConfigError("fully-random scheme does not take tables")
        b0 = np.random.default_rng(derive_seed(config.seed, 0)).integers(0, config.n, m)
        b1 = np.random.default_rng(derive_seed(config.seed, 1)).integers(0, config.n, m)
        return b0.astype(np.int64), b1.astype(np.int64)
    h0, h1 = tables if tables is not None else hash_functions(config)
    return h0.hash_many(keys).astype(np.int64), h1.hash_many(keys).astype(np.int64)


def place_bins(
    keys: np.ndarray, bin0: np.ndarray, bin1: np.ndarray, config: AllocationConfig
) -> RunTrace:
    """Run the greedy process on precomputed candidate bins."""
    n, m = config.n, len(keys)
    one_choice = config.scheme == "one-choice"
    b0 = np.asarray(bin0, dtype=np.int64).tolist()
    b1 = np.asarray(bin1, dtype=np.int64).tolist()
    if m and (min(min(b0), min(b1)) < 0 or max(max(b0), max(b1)) >= n):
        raise DomainError(f"candidate bin outside [0, {n})")
    load0, load1 = [0] * n, [0] * n
    chosen = [0] * m
    before0, before1 = [0] * m, [0] * m
    for j in range(m):
        a, b = b0[j], b1[j]
        x, y = load0[a], load1[b]
        before0[j] = x
        before1[j] = y
        if one_choice or x <= y:
            load0[a] = x + 1
        else:
            load1[b] = y + 1
            chosen[j] = 1
    return RunTrace(
        config=config,
        keys=np.asarray(keys, dtype=np.uint64),
        bin0=np.asarray(b0, dtype=np.int64),
        bin1=np.asarray(b1, dtype=np.int64),
        chosen=np.asarray(chosen, dtype=np.int8),
        load_before=np.column_stack([np.asarray(before0, dtype=np.int64), np.asarray(before1, dtype=np.int64)])
        if m else np.zeros((0, 2), dtype=np.int64),
        final_loads=np.array([load0, load1], dtype=np.int64),
    )


def default_keys(m: int) -> np.ndarray:
    return np.arange(m, dtype=np.uint64)


def place_all(
    keys: Sequence[int] | np.ndarray | None,
    config: AllocationConfig,
    tables: tuple[TabulationTables, TabulationTables] | None = None,
) -> RunTrace:
    """Place ``keys`` (default ``0..m-1``) in order; see module docstring for the rule."""
    keys = default_keys(config.m) if keys is None else np.asarray(keys, dtype=np.uint64)
    if len(keys) != config.m:
        raise ConfigError(f"got {len(keys)} keys for m = {config.m}")
    if config.uses_tables and len(keys) and int(keys.max()) >= config.spec.universe:
        config.spec.check_key(int(keys.max()))
    b0, b1 = choose_bins(keys, config, tables)
    return place_bins(keys, b0, b1, config)


def max_load(trace: RunTrace) -> int:
    return int(trace.final_loads.max()) if trace.final_loads.size else 0


def max_load_bin(trace: RunTrace) -> tuple[int, int]:
    """``(side, bin)`` of a maximally loaded bin, first in vertex order."""
    v = int(np.argmax(trace.final_loads.reshape(-1)))
    return divmod(v, trace.n)


def load_at_time(trace: RunTrace, side: int, b: int, t: int) -> int:
    """Number of balls in bin ``(side, b)`` among the first ``t`` balls."""
    if not 0 <= t <= trace.m:
        raise DomainError(f"time {t} outside [0, {trace.m}]")
    hist = trace.bin_history(side, b)
    return int(np.searchsorted(hist, t, side="left"))


def replay_loads(trace: RunTrace) -> np.ndarray:
    """Final loads recomputed from the per-ball choices."""
    return np.bincount(trace.placed_vertex, minlength=2 * trace.n).reshape(2, trace.n)


def check_greedy_rule(trace: RunTrace) -> bool:
    """Every ball went to the less loaded side, ties to side 0."""
    if trace.m == 0:
        return True
    lb = trace.load_before
    if trace.config.scheme == "one-choice":
        return bool(np.all(trace.chosen == 0))
    want = np.where(lb[:, 0] <= lb[:, 1], 0, 1)
    return bool(np.array_equal(want, trace.chosen))
