"""Frozen multisets over hashable keys.

The canonical encoding is a tuple of (key, count) pairs sorted by key with
strictly positive counts, so multisets are hashable and usable as table
keys (forest or/and nodes are keyed by production multisets).
"""

from __future__ import annotations

from typing import Iterable, Mapping

FrozenMultiset = tuple  # tuple[tuple[key, int], ...], sorted, counts > 0

EMPTY: FrozenMultiset = ()


def freeze(counts: Mapping) -> FrozenMultiset:
    return tuple(sorted((k, c) for k, c in counts.items() if c))


def thaw(ms: FrozenMultiset) -> dict:
    return dict(ms)


def from_elements(elements: Iterable) -> FrozenMultiset:
    counts: dict = {}
    for e in elements:
        counts[e] = counts.get(e, 0) + 1
    return freeze(counts)


def total(ms: FrozenMultiset) -> int:
    return sum(c for _, c in ms)


def count_of(ms: FrozenMultiset, key) -> int:
    for k, c in ms:
        if k == key:
            return c
    return 0


def add(ms: FrozenMultiset, key, amount: int = 1) -> FrozenMultiset:
    d = thaw(ms)
    d[key] = d.get(key, 0) + amount
    return freeze(d)


def remove(ms: FrozenMultiset, key, amount: int = 1) -> FrozenMultiset:
    d = thaw(ms)
    have = d.get(key, 0)
    if have < amount:
        raise ValueError(f"cannot remove {amount} of {key!r}: have {have}")
    d[key] = have - amount
    return freeze(d)


def union(*multisets: FrozenMultiset) -> FrozenMultiset:
    d: dict = {}
    for ms in multisets:
        for k, c in ms:
            d[k] = d.get(k, 0) + c
    return freeze(d)


def subtract(ms: FrozenMultiset, other: FrozenMultiset) -> FrozenMultiset:
    d = thaw(ms)
    for k, c in other:
        have = d.get(k, 0)
        if have < c:
            raise ValueError(f"cannot subtract {c} of {k!r}: have {have}")
        d[k] = have - c
    return freeze(d)


def leq(ms: FrozenMultiset, other: FrozenMultiset) -> bool:
    big = thaw(other)
    return all(big.get(k, 0) >= c for k, c in ms)
