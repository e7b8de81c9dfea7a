"""Lower-bound key sets for simple tabulation with two choices.

The key set is ``[n / k**(c-1)] x [k]**(c-1)``.  If every table at positions
``1..c-1`` maps its first ``k`` characters to one value, the hash of a key
depends only on its position-0 character, so each distinct pair of bins is
hit ``k**(c-1)`` times.  :func:`rig_tables` forces that event directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .allocator import AllocationConfig, ConfigError, RunTrace, is_power_of_two, place_all
from .tabulation import CharSpec, TabulationTables, assemble_key


@dataclass(frozen=True)
class AdversarialSpec:
    n: int
    k: int
    spec: CharSpec

    def __post_init__(self) -> None:
        c, alphabet = self.spec.c, self.spec.alphabet
        if self.k < 1 or self.k > alphabet:
            raise ConfigError(f"k must be in [1, {alphabet}], got {self.k}")
        block = self.k ** (c - 1)
        if self.n < 1 or self.n % block:
            raise ConfigError(f"n = {self.n} is not a positive multiple of k^(c-1) = {block}")
        if self.n // block > alphabet:
            raise ConfigError(f"n / k^(c-1) = {self.n // block} exceeds the alphabet size {alphabet}")

    @property
    def head(self) -> int:
        """Number of distinct position-0 characters."""
        return self.n // self.k ** (self.spec.c - 1)


def generate_adversarial_keys(aspec: AdversarialSpec, order: str = "lexicographic") -> list[int]:
    """All ``n`` keys of the product set, in insertion order.

    ``"lexicographic"`` compares the tuples ``(x_0, ..., x_{c-1})`` from
    position 0, so the ``k**(c-1)`` keys sharing a position-0 character are
    inserted back to back.  ``"numeric"`` sorts by key value (position ``c-1``
    most significant), which inserts each block of copies as a separate pass.
    """
    spec = aspec.spec
    tails = list(product(range(aspec.k), repeat=spec.c - 1))
    if order == "lexicographic":
        return [assemble_key([x0, *tail], spec) for x0 in range(aspec.head) for tail in tails]
    if order == "numeric":
        return sorted(assemble_key([x0, *tail], spec) for x0 in range(aspec.head) for tail in tails)
    raise ConfigError(f"unknown key order {order!r}")


def rig_tables(tables: TabulationTables, k: int) -> TabulationTables:
    """Copy of ``tables`` with ``T_i[0..k-1] = T_i[0]`` for every position ``i >= 1``."""
    spec = tables.spec
    if not 1 <= k <= spec.alphabet:
        raise ConfigError(f"k must be in [1, {spec.alphabet}], got {k}")
    t = np.array(tables.tables, dtype=np.uint64)
    for i in range(1, spec.c):
        t[i, :k] = t[i, 0]
    return TabulationTables(spec, t, tables.seed)


def adversary_spec(n_bins: int, k: int, c: int = 2, q: int | None = None) -> CharSpec:
    """Character spec for ``n_bins`` adversarial keys: ``r = lg n_bins``, smallest ``q`` fitting the head."""
    if not is_power_of_two(n_bins):
        raise ConfigError(f"n_bins must be a power of two, got {n_bins}")
    if q is None:
        q = max(1, math.ceil(math.log2(max(1, n_bins // k ** (c - 1)))))
    return CharSpec(c, q, n_bins.bit_length() - 1)


def adversary_config(aspec: AdversarialSpec, n_bins: int, seed: int, rigged: bool) -> AllocationConfig:
    spec = aspec.spec
    if 1 << spec.r != n_bins:
        raise ConfigError(f"2^r = {1 << spec.r} must equal n_bins = {n_bins}")
    scheme = "rigged-tabulation" if rigged else "tabulation"
    return AllocationConfig(n=n_bins, m=aspec.n, scheme=scheme, spec=spec, seed=seed, rig_k=aspec.k)


def run_adversary(
    aspec: AdversarialSpec, n_bins: int, seed: int, rigged: bool, order: str = "lexicographic"
) -> RunTrace:
    config = adversary_config(aspec, n_bins, seed, rigged)
    keys = generate_adversarial_keys(aspec, order)
    return place_all(keys, config)


def rigging_collapses(trace: RunTrace, spec: CharSpec) -> bool:
    """Keys sharing their position-0 character got identical bins in both tables."""
    mask = np.uint64(spec.alphabet - 1)
    head = (trace.keys & mask).astype(np.int64)
    for bins in (trace.bin0, trace.bin1):
        first: dict[int, int] = {}
        for h, b in zip(head.tolist(), bins.tolist()):
            if first.setdefault(h, b) != b:
                return False
    return True
