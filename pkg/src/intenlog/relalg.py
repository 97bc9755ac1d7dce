"""Finite relations and the extensional algebra over them.

A relation is a set of fixed-arity tuples of domain elements; arity 0
encodes the truth values (the empty relation is falsity, the singleton
holding the empty tuple is truth).  The three operators are the
positional natural join, complement relative to a finite active domain,
and column-eliminating projection, which collapses a unary relation to
a truth value when its last column goes.

Everything here is a pure function over immutable values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass


class RelAlgError(Exception):
    pass


def element_key(element) -> tuple:
    """Deterministic sort key for heterogeneous domain elements."""
    return (
        type(element).__name__,
        str(getattr(element, "name", "")),
        int(getattr(element, "id", 0)),
        "" if not isinstance(element, (str, int)) else str(element),
    )


def row_key(row: tuple) -> tuple:
    return tuple(element_key(e) for e in row)


@dataclass(frozen=True)
class Relation:
    arity: int
    tuples: frozenset

    def __post_init__(self):
        if self.arity < 0:
            raise RelAlgError("relation arity must be >= 0")
        rows = frozenset(tuple(r) for r in self.tuples)
        for r in rows:
            if len(r) != self.arity:
                raise RelAlgError(
                    f"tuple of length {len(r)} in relation of arity {self.arity}"
                )
        object.__setattr__(self, "tuples", rows)

    def __bool__(self):
        return bool(self.tuples)

    def sorted_rows(self) -> list[tuple]:
        return sorted(self.tuples, key=row_key)

    def __repr__(self):
        rows = ", ".join(str(r) for r in self.sorted_rows())
        return f"Relation/{self.arity}{{{rows}}}"


TRUE = Relation(0, frozenset({()}))
FALSE = Relation(0, frozenset())


def truth(flag: bool) -> Relation:
    return TRUE if flag else FALSE


@dataclass(frozen=True)
class ActiveDomain:
    """Finite stand-in for the full element domain, used by complement
    and quantification so both stay computable."""

    elements: frozenset

    def __contains__(self, element):
        return element in self.elements

    def sorted_elements(self) -> list:
        return sorted(self.elements, key=element_key)


def _normalize_pairs(pairs) -> tuple[tuple[int, int], ...]:
    return tuple(sorted({(int(a), int(b)) for a, b in pairs}))


def natural_join(r1: Relation, r2: Relation, pairs) -> Relation:
    """Join on explicit column pairs; empty pairs give the Cartesian product.

    Output columns are all of ``r1`` followed by the non-joined columns
    of ``r2`` in their original order.
    """
    pairs = _normalize_pairs(pairs)
    firsts = [a for a, _ in pairs]
    seconds = [b for _, b in pairs]
    for a, b in pairs:
        if not (1 <= a <= r1.arity and 1 <= b <= r2.arity):
            raise RelAlgError(
                f"join pair ({a},{b}) out of range for arities ({r1.arity},{r2.arity})"
            )
    if len(set(firsts)) != len(firsts) or len(set(seconds)) != len(seconds):
        raise RelAlgError(f"duplicate column in join pairs {pairs}")
    keep = [i for i in range(r2.arity) if i + 1 not in set(seconds)]
    out_arity = r1.arity + len(keep)
    if not pairs:
        rows = {t1 + t2 for t1 in r1.tuples for t2 in r2.tuples}
        return Relation(out_arity, frozenset(rows))
    buckets: dict[tuple, list[tuple]] = {}
    for t2 in r2.tuples:
        buckets.setdefault(tuple(t2[b - 1] for b in seconds), []).append(t2)
    rows = set()
    for t1 in r1.tuples:
        key = tuple(t1[a - 1] for a in firsts)
        for t2 in buckets.get(key, ()):
            rows.add(t1 + tuple(t2[i] for i in keep))
    return Relation(out_arity, frozenset(rows))


def complement(r: Relation, domain: ActiveDomain) -> Relation:
    """Complement within the active domain; on arity 0 it flips truth."""
    if r.arity == 0:
        return truth(not r.tuples)
    if not domain.elements:
        raise RelAlgError("complement requested over an empty active domain")
    for row in r.tuples:
        for e in row:
            if e not in domain:
                raise RelAlgError(f"tuple element {e!r} outside the active domain")
    universe = itertools.product(domain.sorted_elements(), repeat=r.arity)
    rows = frozenset(t for t in universe if t not in r.tuples)
    return Relation(r.arity, rows)


def project_out(r: Relation, n: int) -> Relation:
    """Eliminate column ``n``; collapses to a truth value when n = k = 1
    and leaves the relation unchanged when n is out of range."""
    k = r.arity
    if 1 <= n <= k and k >= 2:
        rows = frozenset(t[: n - 1] + t[n:] for t in r.tuples)
        return Relation(k - 1, rows)
    if n == 1 and k == 1:
        return truth_collapse(r)
    return r


def truth_collapse(r: Relation) -> Relation:
    """Truth iff the relation is nonempty."""
    return truth(bool(r.tuples))
