"""Term families, boundary points, intervals, and the collapse parameters.

For normalized quantifier bodies, every atom on the pivot variable has the
shape z <| rho.  The rho terms generate an extended family F of candidate
functions over strictly decreasing tuples of active positions; their values
are the boundary points that cut the position axis into intervals on which
body truth is residue-periodic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .algebra import GroupTable, MonoidTable, lcm_all
from .errors import NotBoundaryPoint, SizeCap
from .syntax import (
    Cong,
    Eq,
    Formula,
    FreshNames,
    Greater,
    Less,
    LinearTerm,
    Quant,
    all_var_names,
    congruence_moduli,
    free_vars,
    walk,
)
from .words import WordModel

MAX_S = 3
MAX_GROUP = 6
MAX_P = 12
MAX_FAMILY = 600


@dataclass(frozen=True)
class RTerm:
    """A term rho from a z-atom, split into bound-variable part and offset."""

    term: LinearTerm
    bound: tuple[str, ...]  # bound variables occurring in the term

    @property
    def offset(self) -> LinearTerm:
        out = self.term
        for v in self.bound:
            out = out.drop(v)
        return out

    @property
    def bound_coeffs(self) -> tuple[int, ...]:
        return tuple(self.term.coeff(v) for v in self.bound)


@dataclass(frozen=True)
class FFunc:
    """A member of F_t: sum of coeff_i * slot_i plus an offset term in y.

    Slots are filled with a strictly decreasing tuple of active positions.
    """

    coeffs: tuple[int, ...]
    offset: LinearTerm

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def value(self, ds: Sequence[int], env: Mapping[str, int]) -> int:
        return sum(c * d for c, d in zip(self.coeffs, ds)) + self.offset.evaluate(env)

    def term(self, var_names: Sequence[str]) -> LinearTerm:
        return LinearTerm.of(
            list(zip(var_names, self.coeffs)), 0
        ).add(self.offset)

    def describe(self) -> str:
        parts = [f"{c}*#{i + 1}" for i, c in enumerate(self.coeffs)]
        parts.append(str(self.offset))
        return " + ".join(parts)


def _offset_key(t: LinearTerm):
    return (t.const, t.coeffs)


@dataclass(frozen=True)
class CollapseContext:
    """All derived constants for one quantifier elimination."""

    monoid: "MonoidTable | GroupTable"
    z: str
    bodies: tuple[Formula, ...]
    neutral: str
    s: int
    free: tuple[str, ...]
    alpha_prime: int
    delta: int
    q: int
    p: int
    r_phi: int
    T: tuple[LinearTerm, ...]
    F: Mapping[LinearTerm, tuple[FFunc, ...]]
    R: tuple[RTerm, ...]
    var_outer: tuple[str, ...]
    var_tree: tuple[tuple[str, ...], ...]
    var_inner: tuple[str, ...]

    def all_funcs(self) -> list[FFunc]:
        return [f for t in self.T for f in self.F[t]]


def _collect_r_terms(bodies: Sequence[Formula], z: str) -> list[RTerm]:
    zv = LinearTerm.var(z)
    out: list[RTerm] = []
    seen = set()

    def rec(g: Formula, bound: tuple[str, ...]):
        if isinstance(g, (Less, Greater, Eq, Cong)):
            if z in free_vars(g):
                lhs = g.lhs
                if lhs != zv:
                    raise NotBoundaryPoint(
                        f"bodies are not normalized: z-atom {g!r}"
                    )
                rho = g.rhs
                bset = tuple(v for v in bound if rho.coeff(v) != 0)
                key = (rho, bset)
                if key not in seen:
                    seen.add(key)
                    out.append(RTerm(term=rho, bound=bset))
            return
        if isinstance(g, Quant):
            inner = bound + (g.var,)
            if g.guard is not None:
                rec(g.guard, inner)
            for b in g.bodies:
                rec(b, inner)
            return
        for c in (
            (g.sub,) if hasattr(g, "sub") else (getattr(g, "lhs", None), getattr(g, "rhs", None))
        ):
            if isinstance(c, Formula):
                rec(c, bound)

    for b in bodies:
        rec(b, ())
    return out


def collapse_params(
    bodies: Sequence[Formula],
    monoid: "MonoidTable | GroupTable",
    z: str,
    neutral: str = "_",
) -> CollapseContext:
    """Derive every collapse constant from normalized bodies.

    alpha' and s are floored at 1 so the identity function x1 is always in
    the family; this keeps nnp(w) inside the boundary set unconditionally.
    """
    bodies = tuple(bodies)
    r_terms = _collect_r_terms(bodies, z)
    bound_all: set[str] = set()
    for g in bodies:
        for sub in walk(g):
            if isinstance(sub, Quant):
                bound_all.add(sub.var)
    free: set[str] = set()
    for g in bodies:
        free |= free_vars(g)
    free -= {z}
    free -= bound_all

    s = max([1] + [len(rt.bound) for rt in r_terms])
    alpha_prime = max(
        [1] + [abs(c) for rt in r_terms for c in rt.bound_coeffs]
    )
    delta = s * alpha_prime
    q = lcm_all(m for b in bodies for m in congruence_moduli(b))
    p = q * monoid.n
    if s > MAX_S:
        raise SizeCap(f"s={s} exceeds the desk-scale cap {MAX_S}")
    if monoid.n > MAX_GROUP:
        raise SizeCap(f"|G|={monoid.n} exceeds the desk-scale cap {MAX_GROUP}")
    if p > MAX_P:
        raise SizeCap(f"p={p} exceeds the desk-scale cap {MAX_P}")

    offsets = {_offset_key(LinearTerm.constant(0)): LinearTerm.constant(0)}
    for rt in r_terms:
        off = rt.offset
        offsets.setdefault(_offset_key(off), off)
    T = tuple(sorted(offsets.values(), key=_offset_key))

    coeff_range = [c for c in range(-delta, delta + 1) if c != 0]
    funcs: dict[LinearTerm, tuple[FFunc, ...]] = {}
    per_offset_count = sum((2 * delta) ** l for l in range(s + 1))
    if per_offset_count * len(T) > MAX_FAMILY:
        raise SizeCap(
            f"|F| = {per_offset_count * len(T)} exceeds the desk-scale cap {MAX_FAMILY}"
        )
    for t in T:
        fam = [FFunc(coeffs=(), offset=t)]
        for arity in range(1, s + 1):
            for cs in itertools.product(coeff_range, repeat=arity):
                fam.append(FFunc(coeffs=cs, offset=t))
        funcs[t] = tuple(fam)

    r_phi = max(3 * s * delta + 1, 2)

    taken = set(all_var_names(bodies[0]) if bodies else set())
    for b in bodies[1:]:
        taken |= all_var_names(b)
    taken.add(z)
    fresh = FreshNames(taken)
    var_outer = tuple(fresh.make("o") for _ in range(s))
    var_tree = tuple(
        tuple(fresh.make(f"w{k}_") for _ in range(s)) for k in range(1, len(T) + 1)
    )
    var_inner = tuple(fresh.make("u") for _ in range(s))

    return CollapseContext(
        monoid=monoid,
        z=z,
        bodies=bodies,
        neutral=neutral,
        s=s,
        free=tuple(sorted(free)),
        alpha_prime=alpha_prime,
        delta=delta,
        q=q,
        p=p,
        r_phi=r_phi,
        T=T,
        F=funcs,
        R=tuple(r_terms),
        var_outer=var_outer,
        var_tree=var_tree,
        var_inner=var_inner,
    )


@dataclass(frozen=True)
class BoundarySet:
    """The boundary points B, the per-offset split B_t, and the intervals."""

    points: tuple[int, ...]
    per_offset: Mapping[LinearTerm, frozenset]
    ctx: CollapseContext

    def intervals(self) -> list[tuple[int, float]]:
        """Open intervals (-1,b1),(b1,b2),...,(bl,inf) as endpoint pairs."""
        out = []
        prev = -1
        for b in self.points:
            out.append((prev, b))
            prev = b
        out.append((prev, math.inf))
        return out


def decreasing_tuples(values: Sequence[int], arity: int) -> Iterable[tuple[int, ...]]:
    for combo in itertools.combinations(sorted(values, reverse=True), arity):
        yield combo


def boundary_points(w: WordModel, a: Mapping[str, int], ctx: CollapseContext) -> BoundarySet:
    """Materialize B^{w,a}: all non-negative family values on decreasing tuples."""
    nnp = list(w.nnp)
    per: dict[LinearTerm, frozenset] = {}
    for t in ctx.T:
        vals: set[int] = set()
        for f in ctx.F[t]:
            for ds in decreasing_tuples(nnp, f.arity):
                v = f.value(ds, a)
                if v >= 0:
                    vals.add(v)
        per[t] = frozenset(vals)
    points = tuple(sorted(set().union(*per.values()))) if per else ()
    return BoundarySet(points=points, per_offset=per, ctx=ctx)


def interval_of(bset: BoundarySet, x: int) -> int:
    """Index of the interval containing x; raises if x is a boundary point."""
    if x in bset.points:
        raise NotBoundaryPoint(f"{x} is a boundary point, not interior")
    idx = 0
    for b in bset.points:
        if x < b:
            return idx
        idx += 1
    return idx


def il(bset: BoundarySet, b: int) -> "int | float":
    """Length of the interval to the left of b (left endpoint is -1)."""
    if b not in bset.points:
        raise NotBoundaryPoint(f"{b} is not a boundary point")
    prev = -1
    for x in bset.points:
        if x >= b:
            break
        prev = x
    return b - prev - 1


def ir(bset: BoundarySet, b: int) -> "int | float":
    """Length of the interval to the right of b; inf for the maximum point."""
    if b not in bset.points:
        raise NotBoundaryPoint(f"{b} is not a boundary point")
    for x in bset.points:
        if x > b:
            return x - b - 1
    return math.inf
