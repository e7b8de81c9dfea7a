"""Dependent keys under simple tabulation, and exact counting oracles.

A key is identified with the set of its ``c`` position characters, encoded as
a bitmask over ``c * 2**q`` bits, so symmetric difference is integer XOR.  A
family of keys is dependent iff some nonempty sub-multiset has every
position character an even number of times, i.e. the masks are linearly
dependent over GF(2).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

from .tabulation import CharSpec, PositionCharacter, derive_characters

MAX_SUBSET_KEYS = 24
ENUMERATION_LIMIT = 10**9


class CapacityError(ValueError):
    """Input too large for an exhaustive computation."""


def key_mask(key: int, spec: CharSpec) -> int:
    mask = 0
    for pos, ch in enumerate(derive_characters(key, spec)):
        mask |= 1 << (pos * spec.alphabet + ch)
    return mask


def mask_members(mask: int, spec: CharSpec) -> frozenset[PositionCharacter]:
    out = []
    while mask:
        low = mask & -mask
        bit = low.bit_length() - 1
        out.append(PositionCharacter(*divmod(bit, spec.alphabet)))
        mask ^= low
    return frozenset(out)


@dataclass(frozen=True)
class PositionSet:
    """A set of position characters with multiplicities reduced mod 2."""

    members: frozenset[PositionCharacter]

    def __len__(self) -> int:
        return len(self.members)

    def __bool__(self) -> bool:
        return bool(self.members)

    def __xor__(self, other: "PositionSet") -> "PositionSet":
        return PositionSet(self.members ^ other.members)

    @classmethod
    def empty(cls) -> "PositionSet":
        return cls(frozenset())


@dataclass(frozen=True)
class DependencyCertificate:
    """Indices ``subset`` into a key list whose position characters cancel.

    When ``extension`` is set, the subset XORs to the position characters of
    that key instead of to the empty set.
    """

    subset: tuple[int, ...]
    keys: tuple[int, ...]
    extension: int | None = None

    @property
    def is_extension(self) -> bool:
        return self.extension is not None

    def certified_keys(self) -> list[int]:
        """All keys of the certified relation, the extension included."""
        ks = [self.keys[i] for i in self.subset]
        if self.extension is not None:
            ks.append(self.extension)
        return ks

    def verify(self, spec: CharSpec) -> bool:
        return not symmetric_difference(self.certified_keys(), spec)


def symmetric_difference(keys: Iterable[int], spec: CharSpec) -> PositionSet:
    """Position characters occurring an odd number of times across ``keys``."""
    acc = 0
    for key in keys:
        acc ^= key_mask(key, spec)
    return PositionSet(mask_members(acc, spec))


class _Basis:
    """Incremental GF(2) elimination that remembers how each row was formed."""

    def __init__(self) -> None:
        self.rows: dict[int, tuple[int, int]] = {}  # pivot bit -> (vector, combination of inputs)

    def reduce(self, vec: int) -> tuple[int, int]:
        combo = 0
        while vec:
            top = vec.bit_length() - 1
            row = self.rows.get(top)
            if row is None:
                break
            vec ^= row[0]
            combo ^= row[1]
        return vec, combo

    def add(self, vec: int, index: int) -> int | None:
        """Insert input ``index``; return the dependent combination if it reduces to zero."""
        rest, combo = self.reduce(vec)
        combo ^= 1 << index
        if rest == 0:
            return combo
        self.rows[rest.bit_length() - 1] = (rest, combo)
        return None


def _bits(combo: int) -> tuple[int, ...]:
    return tuple(i for i in range(combo.bit_length()) if combo >> i & 1)


def _check_cap(keys: Sequence[int]) -> None:
    if len(keys) > MAX_SUBSET_KEYS:
        raise CapacityError(f"{len(keys)} keys exceeds the cap of {MAX_SUBSET_KEYS}")


def is_dependent_set(keys: Sequence[int], spec: CharSpec) -> DependencyCertificate | None:
    """Certificate for a nonempty subset with empty symmetric difference, if any."""
    keys = [spec.check_key(k) for k in keys]
    _check_cap(keys)
    seen: dict[int, int] = {}
    for i, k in enumerate(keys):
        if k in seen:
            return DependencyCertificate((seen[k], i), tuple(keys))
        seen[k] = i
    basis = _Basis()
    for i, k in enumerate(keys):
        combo = basis.add(key_mask(k, spec), i)
        if combo is not None:
            return DependencyCertificate(_bits(combo), tuple(keys))
    return None


def find_dependent_extensions(
    base: Sequence[int], pool: Iterable[int], spec: CharSpec
) -> list[tuple[int, DependencyCertificate]]:
    """Keys ``y`` of ``pool`` outside ``base`` equal to the XOR of some subset of ``base``."""
    base = [spec.check_key(k) for k in base]
    _check_cap(base)
    basis = _Basis()
    for i, k in enumerate(base):
        basis.add(key_mask(k, spec), i)
    base_set = set(base)
    out = []
    for y in dict.fromkeys(pool):
        if spec.check_key(y) in base_set:
            continue
        rest, combo = basis.reduce(key_mask(y, spec))
        if rest == 0:
            out.append((y, DependencyCertificate(_bits(combo), tuple(base), extension=y)))
    return out


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def zero_sum_bound(n: int, t: int, c: int) -> int:
    return double_factorial(2 * t - 1) ** c * n**t


def zero_sum_product_bound(sizes: Sequence[int], c: int) -> float:
    return double_factorial(len(sizes) - 1) ** c * math.prod(math.sqrt(s) for s in sizes)


def dependent_tuple_bound(n: int, s: int, c: int) -> float:
    return s**4 * 3**c / 6 * n ** (s - 1)


def _guard(count: int) -> None:
    if count > ENUMERATION_LIMIT:
        raise CapacityError(f"enumeration of {count} tuples exceeds {ENUMERATION_LIMIT}")


def _half_sums(sets: Sequence[Sequence[int]]) -> Counter:
    # multiset of XORs over one half of the coordinates
    acc = Counter({0: 1})
    for masks in sets:
        nxt: Counter = Counter()
        for partial, cnt in acc.items():
            for mk in masks:
                nxt[partial ^ mk] += cnt
        acc = nxt
    return acc


def count_zero_sum_product(sets: Sequence[Sequence[int]], spec: CharSpec) -> int:
    """Number of tuples in ``A_1 x ... x A_2t`` whose position characters cancel."""
    if not sets or len(sets) % 2:
        raise ValueError("need an even, nonzero number of coordinate sets")
    _guard(math.prod(len(a) for a in sets))
    masks = [[key_mask(spec.check_key(k), spec) for k in a] for a in sets]
    half = len(sets) // 2
    left, right = _half_sums(masks[:half]), _half_sums(masks[half:])
    return sum(cnt * right.get(mk, 0) for mk, cnt in left.items())


def count_zero_sum_tuples(X: Sequence[int], t: int, spec: CharSpec) -> int:
    """Number of ``2t``-tuples over ``X`` whose position characters cancel."""
    if t < 1:
        raise ValueError("t must be positive")
    _guard(len(X) ** (2 * t))
    return count_zero_sum_product([list(X)] * (2 * t), spec)


def count_dependent_tuples(X: Sequence[int], s: int, spec: CharSpec) -> int:
    """Number of ``s``-tuples over ``X`` having a dependent extension ``y`` in ``X``."""
    if s < 3:
        raise ValueError("s must be at least 3")
    _guard(len(X) ** s)
    X = list(dict.fromkeys(spec.check_key(k) for k in X))
    total = 0
    # membership depends only on the multiset of the tuple
    for idx in combinations_with_replacement(range(len(X)), s):
        base = [X[i] for i in idx]
        if find_dependent_extensions(base, X, spec):
            mult = Counter(idx)
            total += math.factorial(s) // math.prod(math.factorial(v) for v in mult.values())
    return total


def brute_force_dependent(keys: Sequence[int], spec: CharSpec) -> tuple[int, ...] | None:
    """Smallest dependent subset by exhaustive search; reference for short key lists."""
    masks = [key_mask(k, spec) for k in keys]
    for sel in sorted(range(1, 1 << len(keys)), key=lambda b: (bin(b).count("1"), b)):
        acc = 0
        for i, mk in enumerate(masks):
            if sel >> i & 1:
                acc ^= mk
        if acc == 0:
            return _bits(sel)
    return None


def full_universe(spec: CharSpec) -> list[int]:
    return list(range(spec.universe))
