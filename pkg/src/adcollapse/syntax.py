"""Formula AST, linear terms, parsing/printing, and the normal-form rewrite.

Terms are affine integer combinations of variables.  User-facing concrete
syntax only allows natural-number coefficients; negative coefficients appear
after normalization and the printer moves them across the relation symbol,
so every formula stays printable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .algebra import GroupTable, MonoidTable, resolve_monoid
from .errors import (
    ArityMismatch,
    NoMonoidAvailable,
    ParseError,
    PrintError,
    UnknownElement,
)

# ---------------------------------------------------------------------------
# linear terms


@dataclass(frozen=True)
class LinearTerm:
    """Affine term: sum of coeff*var plus a constant.  No zero coefficients."""

    coeffs: tuple[tuple[str, int], ...]
    const: int

    @staticmethod
    def of(coeffs: Mapping[str, int] | Iterable[tuple[str, int]] = (), const: int = 0) -> "LinearTerm":
        acc: dict[str, int] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for v, c in items:
            acc[v] = acc.get(v, 0) + int(c)
        return LinearTerm(
            coeffs=tuple(sorted((v, c) for v, c in acc.items() if c != 0)),
            const=int(const),
        )

    @staticmethod
    def var(name: str, coeff: int = 1) -> "LinearTerm":
        return LinearTerm.of({name: coeff})

    @staticmethod
    def constant(c: int) -> "LinearTerm":
        return LinearTerm.of({}, c)

    def coeff(self, v: str) -> int:
        for name, c in self.coeffs:
            if name == v:
                return c
        return 0

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def add(self, other: "LinearTerm") -> "LinearTerm":
        return LinearTerm.of(
            list(self.coeffs) + list(other.coeffs), self.const + other.const
        )

    def sub(self, other: "LinearTerm") -> "LinearTerm":
        return self.add(other.scale(-1))

    def scale(self, k: int) -> "LinearTerm":
        return LinearTerm.of([(v, c * k) for v, c in self.coeffs], self.const * k)

    def shift(self, k: int) -> "LinearTerm":
        return LinearTerm(self.coeffs, self.const + k)

    def drop(self, v: str) -> "LinearTerm":
        return LinearTerm(tuple((n, c) for n, c in self.coeffs if n != v), self.const)

    def subst_var(self, v: str, replacement: "LinearTerm") -> "LinearTerm":
        c = self.coeff(v)
        if c == 0:
            return self
        return self.drop(v).add(replacement.scale(c))

    def evaluate(self, env: Mapping[str, int]) -> int:
        return self.const + sum(c * env[v] for v, c in self.coeffs)

    def split(self) -> tuple["LinearTerm", "LinearTerm"]:
        """Return (pos, neg) with non-negative entries and self = pos - neg."""
        pos = [(v, c) for v, c in self.coeffs if c > 0]
        neg = [(v, -c) for v, c in self.coeffs if c < 0]
        cp = self.const if self.const > 0 else 0
        cn = -self.const if self.const < 0 else 0
        return LinearTerm.of(pos, cp), LinearTerm.of(neg, cn)

    @property
    def is_bare_var(self) -> bool:
        return self.const == 0 and len(self.coeffs) == 1 and self.coeffs[0][1] == 1

    @property
    def is_const(self) -> bool:
        return not self.coeffs

    def __str__(self) -> str:
        return print_term(self)


ZERO = LinearTerm.constant(0)


# ---------------------------------------------------------------------------
# formulas


class Formula:
    """Base class; concrete variants are frozen dataclasses below."""

    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class Letter(Formula):
    letter: str
    term: LinearTerm


@dataclass(frozen=True)
class Less(Formula):
    lhs: LinearTerm
    rhs: LinearTerm


@dataclass(frozen=True)
class Greater(Formula):
    lhs: LinearTerm
    rhs: LinearTerm


@dataclass(frozen=True)
class Eq(Formula):
    lhs: LinearTerm
    rhs: LinearTerm


@dataclass(frozen=True)
class Cong(Formula):
    """a =mod q b holds iff q divides b - a."""

    q: int
    lhs: LinearTerm
    rhs: LinearTerm

    def __post_init__(self):
        if self.q < 2:
            raise ArityMismatch(f"congruence modulus must be >= 2, got {self.q}")


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Quant(Formula):
    """Monoid quantifier with an optional relativization guard.

    Semantically `Q{M,m} x [g] . <a_1,..,a_K>` equals
    `Q{M,m} x . <g & a_1,..., g & a_K>`.
    """

    monoid: "MonoidTable | GroupTable"
    target: int
    var: str
    bodies: tuple[Formula, ...]
    guard: Optional[Formula] = None

    def __post_init__(self):
        k = self.monoid.n - 1
        if len(self.bodies) != k:
            raise ArityMismatch(
                f"{self.monoid.label} quantifier needs {k} bodies, got {len(self.bodies)}"
            )
        if not (0 <= self.target < self.monoid.n):
            raise UnknownElement(f"target {self.target} out of range")

    def expanded_bodies(self) -> tuple[Formula, ...]:
        if self.guard is None:
            return self.bodies
        return tuple(conj(self.guard, b) for b in self.bodies)


ATOM_TYPES = (Letter, Less, Greater, Eq, Cong)


# smart constructors ---------------------------------------------------------


def neg(f: Formula) -> Formula:
    if f is TRUE or isinstance(f, TrueF):
        return FALSE
    if f is FALSE or isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return f.sub
    return Not(f)


def conj(a: Formula, b: Formula) -> Formula:
    if isinstance(a, FalseF) or isinstance(b, FalseF):
        return FALSE
    if isinstance(a, TrueF):
        return b
    if isinstance(b, TrueF):
        return a
    return And(a, b)


def disj(a: Formula, b: Formula) -> Formula:
    if isinstance(a, TrueF) or isinstance(b, TrueF):
        return TRUE
    if isinstance(a, FalseF):
        return b
    if isinstance(b, FalseF):
        return a
    return Or(a, b)


def conj_all(fs: Iterable[Formula]) -> Formula:
    out: Formula = TRUE
    for f in fs:
        out = conj(out, f)
        if isinstance(out, FalseF):
            return FALSE
    return out


def disj_all(fs: Iterable[Formula]) -> Formula:
    out: Formula = FALSE
    for f in fs:
        out = disj(out, f)
        if isinstance(out, TrueF):
            return TRUE
    return out


def make_quant(
    monoid: "MonoidTable | GroupTable",
    target: int,
    var: str,
    bodies: Sequence[Formula],
    guard: Optional[Formula] = None,
) -> Formula:
    """Quantifier constructor with constant-folding simplifications."""
    bodies = tuple(bodies)
    if guard is not None and isinstance(guard, TrueF):
        guard = None
    all_false = (guard is not None and isinstance(guard, FalseF)) or all(
        isinstance(b, FalseF) for b in bodies
    )
    if all_false:
        # every position contributes the identity
        return TRUE if target == monoid.identity else FALSE
    return Quant(monoid=monoid, target=target, var=var, bodies=bodies, guard=guard)


def leq(a: LinearTerm, b: LinearTerm) -> Formula:
    return neg(Greater(a, b))


# traversal ------------------------------------------------------------------


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, Not):
        return (f.sub,)
    if isinstance(f, (And, Or)):
        return (f.lhs, f.rhs)
    if isinstance(f, Quant):
        return ((f.guard,) if f.guard is not None else ()) + f.bodies
    return ()


def walk(f: Formula):
    """Yield every subformula (DAG nodes visited once)."""
    seen: set[int] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        yield g
        stack.extend(children(g))


def atom_terms(f: Formula) -> tuple[LinearTerm, ...]:
    if isinstance(f, Letter):
        return (f.term,)
    if isinstance(f, (Less, Greater, Eq)):
        return (f.lhs, f.rhs)
    if isinstance(f, Cong):
        return (f.lhs, f.rhs)
    return ()


_FV_CACHE: dict[int, tuple[frozenset, Formula]] = {}


def free_vars(f: Formula) -> frozenset:
    """Free variables, cached per node (formulas are immutable)."""
    hit = _FV_CACHE.get(id(f))
    if hit is not None and hit[1] is f:
        return hit[0]
    if isinstance(f, ATOM_TYPES):
        out = frozenset(v for t in atom_terms(f) for v in t.vars)
    elif isinstance(f, Quant):
        out = frozenset().union(*[free_vars(c) for c in children(f)]) - {f.var}
    elif isinstance(f, (Not, And, Or)):
        out = frozenset().union(*[free_vars(c) for c in children(f)])
    else:
        out = frozenset()
    _FV_CACHE[id(f)] = (out, f)
    return out


def bound_vars(f: Formula) -> set:
    return {g.var for g in walk(f) if isinstance(g, Quant)}


def all_var_names(f: Formula) -> set:
    names = set(bound_vars(f))
    for g in walk(f):
        for t in atom_terms(g):
            names.update(t.vars)
    return names


def quantifier_monoids(f: Formula) -> list:
    out = []
    seen = set()
    for g in walk(f):
        if isinstance(g, Quant) and g.monoid.label not in seen:
            seen.add(g.monoid.label)
            out.append(g.monoid)
    return out


def congruence_moduli(f: Formula) -> list[int]:
    return sorted({g.q for g in walk(f) if isinstance(g, Cong)})


def dag_size(f: Formula) -> int:
    return sum(1 for _ in walk(f))


class FreshNames:
    """Fresh variable names avoiding a given set."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)
        self._counter = 0

    def make(self, prefix: str) -> str:
        while True:
            self._counter += 1
            name = f"{prefix}{self._counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


# substitution ---------------------------------------------------------------


def subst_term(f: Formula, var: str, replacement: LinearTerm) -> Formula:
    """Capture-avoiding substitution of a term for a free variable."""
    fresh = FreshNames(all_var_names(f) | set(replacement.vars) | {var})
    memo: dict[int, Formula] = {}

    def rec(g: Formula) -> Formula:
        if var not in free_vars(g):
            return g
        hit = memo.get(id(g))
        if hit is not None:
            return hit
        if isinstance(g, Letter):
            out: Formula = Letter(g.letter, g.term.subst_var(var, replacement))
        elif isinstance(g, (Less, Greater, Eq)):
            out = type(g)(g.lhs.subst_var(var, replacement), g.rhs.subst_var(var, replacement))
        elif isinstance(g, Cong):
            out = Cong(g.q, g.lhs.subst_var(var, replacement), g.rhs.subst_var(var, replacement))
        elif isinstance(g, Not):
            out = neg(rec(g.sub))
        elif isinstance(g, And):
            out = conj(rec(g.lhs), rec(g.rhs))
        elif isinstance(g, Or):
            out = disj(rec(g.lhs), rec(g.rhs))
        elif isinstance(g, Quant):
            q = g
            if q.var == var:
                return q  # var is shadowed (free_vars said otherwise, defensive)
            if q.var in replacement.vars:
                new_name = fresh.make("r")
                q = rename_binder(q, new_name)
            out = Quant(
                monoid=q.monoid,
                target=q.target,
                var=q.var,
                bodies=tuple(rec(b) for b in q.bodies),
                guard=rec(q.guard) if q.guard is not None else None,
            )
        else:
            out = g
        memo[id(g)] = out
        return out

    return rec(f)


def rename_binder(q: Quant, new_name: str) -> Quant:
    return Quant(
        monoid=q.monoid,
        target=q.target,
        var=new_name,
        bodies=tuple(subst_term(b, q.var, LinearTerm.var(new_name)) for b in q.bodies),
        guard=subst_term(q.guard, q.var, LinearTerm.var(new_name)) if q.guard is not None else None,
    )


def freshen_bound(f: Formula, fresh: Optional[FreshNames] = None, prefix: str = "q") -> Formula:
    """Rename every bound variable to a fresh name (alpha-normalization)."""
    fresh = fresh or FreshNames(all_var_names(f))

    def rec(g: Formula) -> Formula:
        if isinstance(g, Quant):
            q = rename_binder(g, fresh.make(prefix))
            return Quant(
                monoid=q.monoid,
                target=q.target,
                var=q.var,
                bodies=tuple(rec(b) for b in q.bodies),
                guard=rec(q.guard) if q.guard is not None else None,
            )
        if isinstance(g, Not):
            return neg(rec(g.sub))
        if isinstance(g, And):
            return conj(rec(g.lhs), rec(g.rhs))
        if isinstance(g, Or):
            return disj(rec(g.lhs), rec(g.rhs))
        return g

    return rec(f)


# relativization and active-domain shape --------------------------------------


def relativize(q: Quant, guard: Formula) -> Quant:
    """Relativize the quantifier to the positions where `guard` holds."""
    new_guard = guard if q.guard is None else conj(q.guard, guard)
    return Quant(monoid=q.monoid, target=q.target, var=q.var, bodies=q.bodies, guard=new_guard)


def expand_guard(q: Quant) -> Quant:
    return Quant(monoid=q.monoid, target=q.target, var=q.var, bodies=q.expanded_bodies(), guard=None)


def guard_conjuncts(g: Optional[Formula]) -> list[Formula]:
    if g is None:
        return []
    out = []
    stack = [g]
    while stack:
        x = stack.pop()
        if isinstance(x, And):
            stack.extend((x.lhs, x.rhs))
        else:
            out.append(x)
    return out


def neutral_guard(var: str, neutral: str) -> Formula:
    return Not(Letter(neutral, LinearTerm.var(var)))


def has_neutral_guard(q: Quant, neutral: str) -> bool:
    want = neutral_guard(q.var, neutral)
    return any(c == want for c in guard_conjuncts(q.guard))


def is_active_domain(f: Formula, neutral: str = "_") -> bool:
    """True iff every quantifier is relativized with a !neutral(x) guard."""
    return all(
        has_neutral_guard(g, neutral) for g in walk(f) if isinstance(g, Quant)
    )


def active_exists(
    monoid: "MonoidTable | GroupTable", var: str, body: Formula, neutral: str, extra_guard: Optional[Formula] = None
) -> Formula:
    """Active-domain 'exists' via a monoid quantifier with target m_1.

    Correct whenever at most one active position can satisfy `body`
    (groups), or the monoid is U_1 (absorbing target).
    """
    m1 = monoid.ordering[0]
    bodies: list[Formula] = [body] + [FALSE] * (monoid.n - 2)
    guard = neutral_guard(var, neutral)
    if extra_guard is not None:
        guard = conj(guard, extra_guard)
    return make_quant(monoid, m1, var, bodies, guard=guard)


# ---------------------------------------------------------------------------
# printer


def print_term(t: LinearTerm) -> str:
    parts: list[str] = []
    if t.const != 0 or not t.coeffs:
        if t.const < 0:
            raise PrintError(f"cannot print negative constant {t.const}")
        parts.append(str(t.const))
    for v, c in t.coeffs:
        if c < 0:
            raise PrintError(f"cannot print negative coefficient {c}*{v}")
        parts.append(v if c == 1 else f"{c}*{v}")
    return " + ".join(parts)


def _print_sides(lhs: LinearTerm, rhs: LinearTerm) -> tuple[str, str]:
    # shift negative parts across the relation so both sides print in N
    lp, ln = lhs.split()
    rp, rn = rhs.split()
    return print_term(lp.add(rn)), print_term(rp.add(ln))


def print_formula(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Letter):
        return f"'{f.letter}'({print_term(f.term)})"
    if isinstance(f, Less):
        a, b = _print_sides(f.lhs, f.rhs)
        return f"{a} < {b}"
    if isinstance(f, Greater):
        a, b = _print_sides(f.lhs, f.rhs)
        return f"{a} > {b}"
    if isinstance(f, Eq):
        a, b = _print_sides(f.lhs, f.rhs)
        return f"{a} = {b}"
    if isinstance(f, Cong):
        a, b = _print_sides(f.lhs, f.rhs)
        return f"{a} =mod {f.q} {b}"
    if isinstance(f, Not):
        s = print_formula(f.sub)
        if isinstance(f.sub, (And, Or)):
            return f"!{s}"  # already parenthesized
        if isinstance(f.sub, (Quant, Not)):
            return f"!({s})"
        return f"!({s})" if " " in s else f"!{s}"
    if isinstance(f, And):
        return f"({print_formula(f.lhs)} & {print_formula(f.rhs)})"
    if isinstance(f, Or):
        return f"({print_formula(f.lhs)} | {print_formula(f.rhs)})"
    if isinstance(f, Quant):
        elem = f.monoid.element_name(f.target)
        guard = f" [{print_formula(f.guard)}]" if f.guard is not None else ""
        bodies = ", ".join(print_formula(b) for b in f.bodies)
        return f"Q{{{f.monoid.label},{elem}}} {f.var}{guard} . <{bodies}>"
    raise PrintError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<letter>'[^']')"
    r"|(?P<op><|>|=mod|=|\+|\*|&|\||!|\.|,|\(|\)|\[|\]|\{|\}|<)|(?P<other>\S))"
)

_KEYWORDS = {"true", "false", "E", "Q"}


class _Parser:
    def __init__(self, text: str, monoids: Optional[Mapping[str, "MonoidTable | GroupTable"]] = None):
        self.text = text
        self.pos = 0
        self.monoids = monoids or {}
        self._cache: dict[str, "MonoidTable | GroupTable"] = {}

    # --- lexing helpers

    def _ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self._ws()
        return self.text.startswith(s, self.pos)

    def eat(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.eat(s):
            raise ParseError(f"expected {s!r}", self.pos)

    def name(self) -> Optional[str]:
        self._ws()
        m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", self.text[self.pos:])
        if not m:
            return None
        return m.group(0)

    def take_name(self) -> str:
        n = self.name()
        if n is None:
            raise ParseError("expected a name", self.pos)
        self.pos += len(n)
        return n

    def integer(self) -> Optional[int]:
        self._ws()
        m = re.match(r"\d+", self.text[self.pos:])
        if not m:
            return None
        self.pos += len(m.group(0))
        return int(m.group(0))

    def _monoid(self, label: str):
        if label in self._cache:
            return self._cache[label]
        m = resolve_monoid(label, self.monoids)
        self._cache[label] = m
        return m

    # --- grammar

    def formula(self) -> Formula:
        return self.disjunction()

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek("|") and not self.peek("||"):
            self.expect("|")
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.eat("&"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.eat("!"):
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        self._ws()
        if self.eat("("):
            f = self.formula()
            self.expect(")")
            return f
        n = self.name()
        if n == "true":
            self.pos += 4
            return TRUE
        if n == "false":
            self.pos += 5
            return FALSE
        if n == "Q":
            return self.quantifier()
        if n == "E":
            self.pos += 1
            var = self.take_name()
            self.expect(".")
            body = self.formula()
            u1 = self._monoid("U1")
            return Quant(u1, u1.element_index("0"), var, (body,))
        return self.atom()

    def quantifier(self) -> Formula:
        self.expect("Q")
        self.expect("{")
        label = self.take_name()
        self.expect(",")
        self._ws()
        end = self.text.find("}", self.pos)
        if end < 0:
            raise ParseError("unterminated quantifier head", self.pos)
        elem_name = self.text[self.pos:end].strip()
        self.pos = end + 1
        monoid = self._monoid(label)
        target = monoid.element_index(elem_name)
        var = self.take_name()
        guard = None
        if self.eat("["):
            guard = self.formula()
            self.expect("]")
        self.expect(".")
        self.expect("<")
        bodies: list[Formula] = []
        self._ws()
        if not self.peek(">"):
            bodies.append(self.formula())
            while self.eat(","):
                bodies.append(self.formula())
        self.expect(">")
        try:
            return Quant(monoid, target, var, tuple(bodies), guard=guard)
        except ArityMismatch as e:
            raise ParseError(str(e), self.pos) from e

    def atom(self) -> Formula:
        self._ws()
        if self.pos < len(self.text) and self.text[self.pos] == "'":
            m = re.match(r"'([^']+)'", self.text[self.pos:])
            if not m:
                raise ParseError("unterminated letter literal", self.pos)
            letter = m.group(1)
            self.pos += len(m.group(0))
            self.expect("(")
            t = self.term()
            self.expect(")")
            return Letter(letter, t)
        lhs = self.term()
        if self.eat("=mod"):
            q = self.integer()
            if q is None:
                raise ParseError("expected a modulus", self.pos)
            rhs = self.term()
            return Cong(q, lhs, rhs)
        if self.eat("<"):
            return Less(lhs, self.term())
        if self.eat(">"):
            return Greater(lhs, self.term())
        if self.eat("="):
            return Eq(lhs, self.term())
        raise ParseError("expected a relation symbol", self.pos)

    def term(self) -> LinearTerm:
        t = self.term_atom()
        while self.eat("+"):
            t = t.add(self.term_atom())
        return t

    def term_atom(self) -> LinearTerm:
        self._ws()
        k = self.integer()
        if k is not None:
            if self.eat("*"):
                v = self.take_name()
                return LinearTerm.var(v, k)
            return LinearTerm.constant(k)
        n = self.name()
        if n is None or n in _KEYWORDS:
            raise ParseError("expected a term", self.pos)
        self.pos += len(n)
        return LinearTerm.var(n)


def parse(text: str, monoids: Optional[Mapping[str, "MonoidTable | GroupTable"]] = None) -> Formula:
    p = _Parser(text, monoids)
    f = p.formula()
    p._ws()
    if p.pos != len(p.text):
        raise ParseError("trailing input", p.pos)
    return f


# ---------------------------------------------------------------------------
# normal form


@dataclass(frozen=True)
class NormalizedFormula:
    formula: Formula
    pivot: str
    divisor: int


def _rewrite_letter_atoms(
    f: Formula, z: str, monoid: Optional["MonoidTable | GroupTable"], neutral: str, fresh: FreshNames
) -> Formula:
    """Rewrite letter atoms on compound terms (or any term mentioning z)."""

    def rec(g: Formula) -> Formula:
        if isinstance(g, Letter):
            needs = (z in g.term.vars) or not g.term.is_bare_var
            if not needs:
                return g
            if monoid is None:
                raise NoMonoidAvailable(
                    "no monoid available to rewrite a letter atom on a compound term"
                )
            x = fresh.make("x")
            xv = LinearTerm.var(x)
            if g.letter == neutral:
                # lambda(t) holds iff no active position equals t
                body: Formula = Eq(xv, g.term)
                return neg(active_exists(monoid, x, body, neutral))
            body = conj(Eq(xv, g.term), Letter(g.letter, xv))
            return active_exists(monoid, x, body, neutral)
        if isinstance(g, Not):
            return neg(rec(g.sub))
        if isinstance(g, And):
            return conj(rec(g.lhs), rec(g.rhs))
        if isinstance(g, Or):
            return disj(rec(g.lhs), rec(g.rhs))
        if isinstance(g, Quant):
            return Quant(
                monoid=g.monoid,
                target=g.target,
                var=g.var,
                bodies=tuple(rec(b) for b in g.bodies),
                guard=rec(g.guard) if g.guard is not None else None,
            )
        return g

    return rec(f)


def _z_atom_coefficients(f: Formula, z: str) -> list[int]:
    out = []
    for g in walk(f):
        if isinstance(g, (Less, Greater, Eq)):
            k = g.lhs.coeff(z) - g.rhs.coeff(z)
            if k != 0:
                out.append(abs(k))
        elif isinstance(g, Cong):
            k = g.rhs.coeff(z) - g.lhs.coeff(z)
            if k != 0:
                out.append(abs(k))
    return out


def _scale_z_atoms(f: Formula, z: str, n: int) -> Formula:
    """Rewrite every atom mentioning z to shape z <| rho with z-coefficient 1.

    The rewrite multiplies each atom by n/|k| and reads the variable z as
    n times its old value, so it must be paired with a z =mod n 0 conjunct.
    """
    zv = LinearTerm.var(z)

    def comparison(g) -> Formula:
        d = g.lhs.sub(g.rhs)
        k = d.coeff(z)
        rest = d.drop(z)
        if k == 0:
            pos, negp = rest.split()
            return type(g)(pos, negp)
        c = n // abs(k)
        if isinstance(g, Eq):
            rho = rest.scale(-c) if k > 0 else rest.scale(c)
            return Eq(zv, rho)
        flip = k < 0
        rho = rest.scale(-c) if k > 0 else rest.scale(c)
        if isinstance(g, Less):
            return Greater(zv, rho) if flip else Less(zv, rho)
        return Less(zv, rho) if flip else Greater(zv, rho)

    def congruence(g: Cong) -> Formula:
        d = g.rhs.sub(g.lhs)  # q | d
        k = d.coeff(z)
        rest = d.drop(z)
        if k == 0:
            pos, negp = rest.split()
            return Cong(g.q, pos, negp)
        c = n // abs(k)
        rho = rest.scale(-c) if k > 0 else rest.scale(c)
        return Cong(g.q * c, zv, rho)

    def rec(g: Formula) -> Formula:
        if isinstance(g, (Less, Greater, Eq)):
            if z in free_vars(g):
                return comparison(g)
            return g
        if isinstance(g, Cong):
            if z in free_vars(g):
                return congruence(g)
            return g
        if isinstance(g, Letter):
            if z in g.term.vars:
                raise NoMonoidAvailable("letter atom on z survived the rewrite pass")
            return g
        if isinstance(g, Not):
            return neg(rec(g.sub))
        if isinstance(g, And):
            return conj(rec(g.lhs), rec(g.rhs))
        if isinstance(g, Or):
            return disj(rec(g.lhs), rec(g.rhs))
        if isinstance(g, Quant):
            if z not in free_vars(g):
                return g
            return Quant(
                monoid=g.monoid,
                target=g.target,
                var=g.var,
                bodies=tuple(rec(b) for b in g.bodies),
                guard=rec(g.guard) if g.guard is not None else None,
            )
        return g

    return rec(f)


def _first_monoid(bodies: Sequence[Formula]):
    for b in bodies:
        ms = quantifier_monoids(b)
        if ms:
            return ms[0]
    return None


def normalize_bodies(
    bodies: Sequence[Formula],
    z: str,
    monoid: Optional["MonoidTable | GroupTable"] = None,
    neutral: str = "_",
    fresh: Optional[FreshNames] = None,
) -> tuple[tuple[Formula, ...], int]:
    """Jointly normalize quantifier bodies with respect to the variable z.

    All bodies are scaled by one shared divisor n (the lcm of every
    z-coefficient) so that the quantifier product is preserved under the
    witness bijection z' = n*z; each body gets a z =mod n 0 conjunct.
    """
    if fresh is None:
        taken = set()
        for b in bodies:
            taken |= all_var_names(b)
        fresh = FreshNames(taken | {z})
    monoid = monoid or _first_monoid(bodies)
    step1 = [_rewrite_letter_atoms(b, z, monoid, neutral, fresh) for b in bodies]
    n = 1
    for b in step1:
        for k in _z_atom_coefficients(b, z):
            n = math.lcm(n, k)
    step2 = [_scale_z_atoms(b, z, n) for b in step1]
    if n > 1:
        mod = Cong(n, LinearTerm.var(z), ZERO)
        step2 = [conj(b, mod) for b in step2]
    return tuple(step2), n


def normalize(
    f: Formula,
    z: str,
    monoid: Optional["MonoidTable | GroupTable"] = None,
    neutral: str = "_",
) -> NormalizedFormula:
    """Normal form of a single formula with respect to z."""
    (out,), n = normalize_bodies([f], z, monoid=monoid, neutral=neutral)
    return NormalizedFormula(formula=out, pivot=z, divisor=n)


def z_atoms(f: Formula, z: str) -> list[Formula]:
    """The atoms mentioning z (after normalization: all of shape z <| rho)."""
    zv = LinearTerm.var(z)
    out = []
    for g in walk(f):
        if isinstance(g, (Less, Greater, Eq, Cong)) and z in free_vars(g):
            out.append(g)
        elif isinstance(g, Letter) and z in g.term.vars:
            out.append(g)
    return out
