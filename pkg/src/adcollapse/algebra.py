"""Finite monoids and groups as explicit multiplication tables.

Elements are dense indices 0..n-1.  Every table carries a fixed enumeration
m_1..m_K of its non-identity elements; the quantifier semantics depends on
that enumeration, so it is stored explicitly rather than recomputed.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (
    InvalidOrder,
    NoIdentity,
    NotAGroup,
    NotAssociative,
    SizeCap,
    TooLarge,
    UnknownElement,
    UnknownMonoid,
)

DIVIDES_SIZE_CAP = 8


@dataclass(frozen=True)
class MonoidTable:
    """A finite monoid given by its full multiplication table."""

    label: str
    identity: int
    table: tuple[tuple[int, ...], ...]
    names: tuple[str, ...]
    ordering: tuple[int, ...]  # the non-identity elements m_1..m_K

    @property
    def n(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def elements(self) -> range:
        return range(self.n)

    def element_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            pass
        # cyclic groups: accept "g" for the generator and "e" for the identity
        if name in ("e", "1_G") :
            return self.identity
        if name == "g" and self.n >= 2:
            return self.ordering[0]
        raise UnknownElement(f"{self.label} has no element named {name!r}")

    def element_name(self, idx: int) -> str:
        return self.names[idx]

    def is_group(self) -> bool:
        els = set(range(self.n))
        return all(set(row) == els for row in self.table) and all(
            {self.table[a][b] for a in range(self.n)} == els for b in range(self.n)
        )


@dataclass(frozen=True)
class GroupTable:
    """A finite group: a monoid table plus its inverse map."""

    base: MonoidTable
    inv_table: tuple[int, ...]

    @property
    def label(self) -> str:
        return self.base.label

    @property
    def identity(self) -> int:
        return self.base.identity

    @property
    def table(self) -> tuple[tuple[int, ...], ...]:
        return self.base.table

    @property
    def names(self) -> tuple[str, ...]:
        return self.base.names

    @property
    def ordering(self) -> tuple[int, ...]:
        return self.base.ordering

    @property
    def n(self) -> int:
        return self.base.n

    def mul(self, a: int, b: int) -> int:
        return self.base.table[a][b]

    def inv(self, a: int) -> int:
        return self.inv_table[a]

    def elements(self) -> range:
        return range(self.n)

    def element_index(self, name: str) -> int:
        return self.base.element_index(name)

    def element_name(self, idx: int) -> str:
        return self.base.names[idx]

    def is_group(self) -> bool:
        return True


MonoidLike = "MonoidTable | GroupTable"


def _check_table(table: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    n = len(table)
    rows = []
    for row in table:
        if len(row) != n:
            raise NotAssociative(f"table is not square: row length {len(row)} != {n}")
        for x in row:
            if not (0 <= int(x) < n):
                raise NotAssociative(f"table entry {x} out of range [0,{n - 1}]")
        rows.append(tuple(int(x) for x in row))
    return tuple(rows)


def make_monoid(
    table: Sequence[Sequence[int]],
    identity: int,
    names: Optional[Sequence[str]] = None,
    ordering: Optional[Sequence[int]] = None,
    label: str = "M",
) -> MonoidTable:
    """Validate a multiplication table and wrap it as a monoid.

    The non-identity ordering defaults to ascending element index.
    """
    t = _check_table(table)
    n = len(t)
    if n == 0:
        raise NoIdentity("empty table has no identity")
    identity = int(identity)
    if not (0 <= identity < n):
        raise NoIdentity(f"identity index {identity} out of range")
    for a in range(n):
        if t[identity][a] != a or t[a][identity] != a:
            raise NoIdentity(f"element {identity} is not an identity")
    for a in range(n):
        for b in range(n):
            tab = t[a][b]
            for c in range(n):
                if t[tab][c] != t[a][t[b][c]]:
                    raise NotAssociative(
                        f"associativity fails at ({a},{b},{c})"
                    )
    if names is None:
        names = tuple(str(i) for i in range(n))
    else:
        names = tuple(str(x) for x in names)
        if len(names) != n or len(set(names)) != n:
            raise UnknownElement("names must be distinct and match the table size")
    if ordering is None:
        ordering = tuple(i for i in range(n) if i != identity)
    else:
        ordering = tuple(int(i) for i in ordering)
        if sorted(ordering) != sorted(i for i in range(n) if i != identity):
            raise UnknownElement("ordering must be a permutation of the non-identity elements")
    return MonoidTable(label=label, identity=identity, table=t, names=names, ordering=ordering)


def as_group(m: "MonoidTable | GroupTable") -> GroupTable:
    """View a monoid as a group, deriving inverses; raises NotAGroup."""
    if isinstance(m, GroupTable):
        return m
    if not m.is_group():
        raise NotAGroup(f"{m.label} is not a group")
    inv = []
    for a in range(m.n):
        b = m.table[a].index(m.identity)
        if m.table[b][a] != m.identity:
            raise NotAGroup(f"{m.label}: no two-sided inverse for element {a}")
        inv.append(b)
    return GroupTable(base=m, inv_table=tuple(inv))


def make_u1() -> MonoidTable:
    """The two-element monoid {0,1} under multiplication (identity 1)."""
    # index 0 holds element "0" (absorbing), index 1 holds "1" (identity)
    return make_monoid(
        [[0, 0], [0, 1]], identity=1, names=("0", "1"), ordering=(0,), label="U1"
    )


def make_cyclic(q: int) -> GroupTable:
    """The cyclic group C_q under addition mod q (identity 0)."""
    q = int(q)
    if q < 1:
        raise InvalidOrder(f"cyclic group order must be >= 1, got {q}")
    table = [[(a + b) % q for b in range(q)] for a in range(q)]
    m = make_monoid(table, identity=0, names=tuple(str(i) for i in range(q)), label=f"C{q}")
    return as_group(m)


def _cycle_name(perm: tuple[int, ...]) -> str:
    seen = [False] * len(perm)
    cycles = []
    for start in range(len(perm)):
        if seen[start] or perm[start] == start:
            seen[start] = True
            continue
        cyc = [start]
        seen[start] = True
        x = perm[start]
        while x != start:
            cyc.append(x)
            seen[x] = True
            x = perm[x]
        cycles.append(cyc)
    if not cycles:
        return "e"
    return "".join("(" + "".join(str(p + 1) for p in c) + ")" for c in cycles)


def make_symmetric(n: int) -> GroupTable:
    """S_n as a composition table; (p*q)(x) = p(q(x)).  Capped at n <= 5."""
    n = int(n)
    if n < 1:
        raise InvalidOrder(f"symmetric group degree must be >= 1, got {n}")
    if n > 5:
        raise TooLarge(f"S_{n} exceeds the desk-scale cap (n <= 5)")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [
        [index[tuple(p[q[x]] for x in range(n))] for q in perms]
        for p in perms
    ]
    names = tuple(_cycle_name(p) for p in perms)
    m = make_monoid(table, identity=0, names=names, label=f"S{n}")
    return as_group(m)


def product(m: "MonoidTable | GroupTable", seq: Iterable[int]) -> int:
    """Left-to-right product; the empty sequence gives the identity."""
    acc = m.identity
    for x in seq:
        acc = m.mul(acc, x)
    return acc


def element_order(g: "MonoidTable | GroupTable", a: int) -> int:
    """Order of a as an element (first k >= 1 with a^k back at a^0 cycle start)."""
    acc = g.mul(g.identity, a)
    k = 1
    while acc != g.identity:
        acc = g.mul(acc, a)
        k += 1
        if k > g.n + 1:
            raise NotAGroup(f"element {a} has no finite order back to identity")
    return k


def _submonoids(n_table: MonoidTable) -> list[tuple[int, ...]]:
    n = n_table.n
    out = []
    for mask in range(1 << n):
        if not (mask >> n_table.identity) & 1:
            continue
        subset = [i for i in range(n) if (mask >> i) & 1]
        if all((mask >> n_table.mul(a, b)) & 1 for a in subset for b in subset):
            out.append(tuple(subset))
    return out


def _morphisms_onto(sub: tuple[int, ...], n_table: MonoidTable, m_table: MonoidTable):
    """Yield surjective monoid morphisms from the submonoid onto M."""
    pos = {e: i for i, e in enumerate(sub)}
    k = len(sub)
    image: list[Optional[int]] = [None] * k
    image[pos[n_table.identity]] = m_table.identity

    def consistent(i: int) -> bool:
        a = sub[i]
        for j in range(k):
            if image[j] is None:
                continue
            b = sub[j]
            ab = n_table.mul(a, b)
            ba = n_table.mul(b, a)
            if image[pos[ab]] is not None and image[pos[ab]] != m_table.mul(image[i], image[j]):
                return False
            if image[pos[ba]] is not None and image[pos[ba]] != m_table.mul(image[j], image[i]):
                return False
        return True

    order = [i for i in range(k) if image[i] is None]

    def rec(idx: int):
        if idx == len(order):
            if set(image) == set(range(m_table.n)):
                yield tuple(image)  # type: ignore[arg-type]
            return
        i = order[idx]
        for v in range(m_table.n):
            image[i] = v
            if consistent(i):
                yield from rec(idx + 1)
        image[i] = None

    yield from rec(0)


def divides(m: "MonoidTable | GroupTable", n: "MonoidTable | GroupTable") -> bool:
    """True iff some submonoid of N maps surjectively and homomorphically onto M.

    Brute force; both sizes are capped at DIVIDES_SIZE_CAP.
    """
    mt = m.base if isinstance(m, GroupTable) else m
    nt = n.base if isinstance(n, GroupTable) else n
    if mt.n > DIVIDES_SIZE_CAP or nt.n > DIVIDES_SIZE_CAP:
        raise SizeCap(
            f"divides is capped at size {DIVIDES_SIZE_CAP} (got {mt.n}, {nt.n})"
        )
    for sub in _submonoids(nt):
        if len(sub) < mt.n:
            continue
        for _ in _morphisms_onto(sub, nt, mt):
            return True
    return False


_BUILTIN_RE = re.compile(r"^(U1|C(\d+)|S(\d+))$")


def resolve_monoid(
    name: str, registry: Optional[Mapping[str, "MonoidTable | GroupTable"]] = None
) -> "MonoidTable | GroupTable":
    """Resolve a monoid by name: registry entries first, then U1/C<q>/S<n>."""
    if registry and name in registry:
        return registry[name]
    m = _BUILTIN_RE.match(name)
    if not m:
        raise UnknownMonoid(f"unknown monoid {name!r}")
    if name == "U1":
        return make_u1()
    if m.group(2) is not None:
        q = int(m.group(2))
        if q < 1:
            raise UnknownMonoid(f"unknown monoid {name!r}")
        return make_cyclic(q)
    return make_symmetric(int(m.group(3)))


def monoid_from_json(data: dict, label: str = "M") -> "MonoidTable | GroupTable":
    """Build a monoid from the JSON definition format.

    Keys: "elements" (string array), "identity" (string), "table" (array of
    arrays of element names), optional "ordering" (string array).
    """
    names = [str(x) for x in data["elements"]]
    idx = {nm: i for i, nm in enumerate(names)}
    if len(idx) != len(names):
        raise UnknownElement("duplicate element names")
    if data["identity"] not in idx:
        raise NoIdentity(f"identity {data['identity']!r} is not an element")
    table = [[idx[str(x)] for x in row] for row in data["table"]]
    ordering = None
    if "ordering" in data:
        ordering = [idx[str(x)] for x in data["ordering"]]
    m = make_monoid(
        table, idx[data["identity"]], names=names, ordering=ordering, label=label
    )
    return as_group(m) if m.is_group() else m


def load_monoid_file(path: "str | Path") -> "MonoidTable | GroupTable":
    p = Path(path)
    return monoid_from_json(json.loads(p.read_text()), label=p.stem)


def lcm_all(values: Iterable[int]) -> int:
    """lcm with the empty-input convention of 1."""
    out = 1
    for v in values:
        out = math.lcm(out, v)
    return out
