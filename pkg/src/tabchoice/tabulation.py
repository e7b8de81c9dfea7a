"""Simple tabulation hashing.

A key of ``c*q`` bits is split into ``c`` characters of ``q`` bits each
(position 0 holds the least-significant bits).  Each position owns a table of
``2**q`` random ``r``-bit entries and the hash value is the XOR of the ``c``
selected entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

MASK64 = (1 << 64) - 1


class DomainError(ValueError):
    """A key or character lies outside the range of its CharSpec."""


@dataclass(frozen=True)
class CharSpec:
    """Character decomposition: ``c`` characters of ``q`` bits, ``r`` output bits."""

    c: int = 2
    q: int = 8
    r: int = 16

    def __post_init__(self) -> None:
        if not 1 <= self.c <= 8:
            raise ValueError(f"c must be in [1, 8], got {self.c}")
        if not 1 <= self.q <= 16:
            raise ValueError(f"q must be in [1, 16], got {self.q}")
        if not 1 <= self.r <= 64:
            raise ValueError(f"r must be in [1, 64], got {self.r}")
        if self.c * self.q > 64:
            raise ValueError(f"c*q = {self.c * self.q} exceeds 64 bits")

    @property
    def alphabet(self) -> int:
        return 1 << self.q

    @property
    def universe(self) -> int:
        return 1 << (self.c * self.q)

    @property
    def range(self) -> int:
        return 1 << self.r

    def check_key(self, key: int) -> int:
        key = int(key)
        if key < 0 or key >= self.universe:
            raise DomainError(f"key {key:#x} outside universe [0, 2^{self.c * self.q})")
        return key


class PositionCharacter(NamedTuple):
    position: int
    character: int


def derive_characters(key: int, spec: CharSpec) -> list[int]:
    """Split ``key`` into its ``c`` characters, least-significant first."""
    key = spec.check_key(key)
    mask = spec.alphabet - 1
    return [(key >> (i * spec.q)) & mask for i in range(spec.c)]


def assemble_key(chars: Sequence[int], spec: CharSpec) -> int:
    """Inverse of :func:`derive_characters`."""
    if len(chars) != spec.c:
        raise DomainError(f"expected {spec.c} characters, got {len(chars)}")
    key = 0
    for i, ch in enumerate(chars):
        if not 0 <= ch < spec.alphabet:
            raise DomainError(f"character {ch} at position {i} outside [0, 2^{spec.q})")
        key |= int(ch) << (i * spec.q)
    return key


def position_characters(key: int, spec: CharSpec) -> list[PositionCharacter]:
    return [PositionCharacter(i, ch) for i, ch in enumerate(derive_characters(key, spec))]


def derive_seed(seed: int, index: int) -> int:
    """Deterministic 64-bit sub-seed for stream ``index`` under ``seed``."""
    ss = np.random.SeedSequence((int(seed) & MASK64, int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _stream(seed: int, index: int) -> np.random.Generator:
    # Philox is counter-based; each (seed, index) key gets its own stream.
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((int(seed) & MASK64, int(index)))))


def random_table(spec: CharSpec, seed: int, index: int) -> np.ndarray:
    """Table ``index`` of the tabulation function seeded by ``seed``."""
    raw = _stream(seed, index).integers(0, 1 << 64, size=spec.alphabet, dtype=np.uint64, endpoint=False)
    if spec.r < 64:
        raw &= np.uint64((1 << spec.r) - 1)
    return raw


@dataclass(frozen=True, eq=False)
class TabulationTables:
    """The ``c`` character tables of one simple tabulation hash function."""

    spec: CharSpec
    tables: np.ndarray  # shape (c, 2**q), dtype uint64
    seed: int = 0

    def __post_init__(self) -> None:
        t = np.asarray(self.tables, dtype=np.uint64)
        if t.shape != (self.spec.c, self.spec.alphabet):
            raise ValueError(f"tables must have shape {(self.spec.c, self.spec.alphabet)}, got {t.shape}")
        if self.spec.r < 64 and t.size and int(t.max()) >= self.spec.range:
            raise ValueError(f"table entries must be < 2^{self.spec.r}")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "tables", t)

    @classmethod
    def from_lists(cls, spec: CharSpec, tables: Sequence[Sequence[int]], seed: int = 0) -> "TabulationTables":
        return cls(spec, np.array(tables, dtype=np.uint64), seed)

    @classmethod
    def zeros(cls, spec: CharSpec) -> "TabulationTables":
        return cls(spec, np.zeros((spec.c, spec.alphabet), dtype=np.uint64))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TabulationTables):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.tables, other.tables)

    def __call__(self, key: int) -> int:
        return hash_key(self, key)

    def hash_many(self, keys: Iterable[int] | np.ndarray) -> np.ndarray:
        """Vectorised :func:`hash_key` over an array of keys."""
        spec = self.spec
        keys = np.asarray(keys, dtype=np.uint64)
        if keys.size and int(keys.max()) >= spec.universe:
            spec.check_key(int(keys.max()))
        out = np.zeros(keys.shape, dtype=np.uint64)
        mask = np.uint64(spec.alphabet - 1)
        for i in range(spec.c):
            chars = (keys >> np.uint64(i * spec.q)) & mask
            out ^= self.tables[i][chars.astype(np.intp)]
        return out


def build_tables(spec: CharSpec, seed: int) -> TabulationTables:
    """Fill the ``c`` tables from decorrelated streams keyed by ``(seed, i)``."""
    seed = int(seed) & MASK64
    tables = np.stack([random_table(spec, seed, i) for i in range(spec.c)])
    return TabulationTables(spec, tables, seed)


def hash_key(tables: TabulationTables, key: int) -> int:
    value = 0
    for i, ch in enumerate(derive_characters(key, tables.spec)):
        value ^= int(tables.tables[i][ch])
    return value


def hash_position_set(tables: TabulationTables, pcs: Iterable[PositionCharacter | tuple[int, int]]) -> int:
    """XOR of the table entries of a set of position characters."""
    spec = tables.spec
    value = 0
    for pos, ch in set(pcs):
        if not (0 <= pos < spec.c and 0 <= ch < spec.alphabet):
            raise DomainError(f"position character {(pos, ch)} outside spec")
        value ^= int(tables.tables[pos][ch])
    return value
