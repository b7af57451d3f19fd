"""Evaluators: finite-horizon semantics, omega-probing, and exact oracles.

The finite-horizon evaluator restricts quantifiers to positions [0, H).
Quantifiers whose guard pins the variable to active (non-neutral) positions
iterate over the word's support only; other quantifiers iterate over a
compressed event set with periodic stretches in between, falling back to a
plain position loop when the bodies are too entangled to analyze.  The
compressed path is validated against the naive evaluator by differential
tests.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .algebra import GroupTable, MonoidTable, as_group, lcm_all, product
from .errors import BodiesNotActiveDomain, HorizonTooSmall, NotBoundaryPoint
from .syntax import (
    And,
    Cong,
    Eq,
    FalseF,
    Formula,
    Greater,
    Less,
    Letter,
    LinearTerm,
    Not,
    Or,
    Quant,
    TrueF,
    children,
    congruence_moduli,
    free_vars,
    guard_conjuncts,
    is_active_domain,
    quantifier_monoids,
    walk,
)
from .words import WordModel, letter_at


class OmegaVerdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    NON_CONVERGENT = "non-convergent"

    @staticmethod
    def of(b: bool) -> "OmegaVerdict":
        return OmegaVerdict.TRUE if b else OmegaVerdict.FALSE


def u_value(
    bodies: Sequence[Formula],
    monoid: "MonoidTable | GroupTable",
    w: WordModel,
    i: int,
    a: Mapping[str, int],
    var: str = "z",
    horizon: Optional[int] = None,
) -> int:
    """The monoid element assigned to position i by the body case split."""
    if len(bodies) != monoid.n - 1:
        raise BodiesNotActiveDomain(
            f"expected {monoid.n - 1} bodies, got {len(bodies)}"
        )
    env = dict(a)
    env[var] = i
    h = horizon if horizon is not None else default_horizon(bodies[0] if bodies else None, w, env)
    ev = _Eval(w, h)
    for j, b in enumerate(bodies):
        if ev.run(b, env):
            return monoid.ordering[j]
    return monoid.identity


# ---------------------------------------------------------------------------
# core evaluator


def _letter_holds(w: WordModel, letter: str, pos: int) -> bool:
    if pos < 0:
        return False
    return letter_at(w, pos) == letter


def _atom_value(f: Formula, w: WordModel, env: Mapping[str, int]) -> bool:
    if isinstance(f, Letter):
        return _letter_holds(w, f.letter, f.term.evaluate(env))
    if isinstance(f, Less):
        return f.lhs.evaluate(env) < f.rhs.evaluate(env)
    if isinstance(f, Greater):
        return f.lhs.evaluate(env) > f.rhs.evaluate(env)
    if isinstance(f, Eq):
        return f.lhs.evaluate(env) == f.rhs.evaluate(env)
    if isinstance(f, Cong):
        return (f.rhs.evaluate(env) - f.lhs.evaluate(env)) % f.q == 0
    raise TypeError(f"not an atom: {f!r}")


def _pow_element(m: "MonoidTable | GroupTable", a: int, e: int) -> int:
    """a^e in the monoid for e >= 0, via cycle detection (e may be huge)."""
    if e == 0:
        return m.identity
    powers = [a]
    seen = {a: 0}
    cur = a
    while True:
        nxt = m.mul(cur, a)
        if nxt in seen:
            start = seen[nxt]
            cycle = len(powers) - start
            idx = e - 1
            if idx < len(powers):
                return powers[idx]
            return powers[start + (idx - start) % cycle]
        seen[nxt] = len(powers)
        powers.append(nxt)
        cur = nxt
        if e - 1 < len(powers):
            return powers[e - 1]


class _Unsupported(Exception):
    pass


_EBODY_CACHE: dict[int, tuple[Quant, tuple[Formula, ...]]] = {}


def _effective_bodies(q: Quant) -> tuple[Formula, ...]:
    hit = _EBODY_CACHE.get(id(q))
    if hit is not None and hit[0] is q:
        return hit[1]
    eb = q.expanded_bodies()
    _EBODY_CACHE[id(q)] = (q, eb)
    return eb


def _support_restricted(q: Quant, neutral: str) -> bool:
    """True if the guard forces the quantified variable onto the support."""
    var = q.var
    for c in guard_conjuncts(q.guard):
        if (
            isinstance(c, Not)
            and isinstance(c.sub, Letter)
            and c.sub.letter == neutral
            and c.sub.term == LinearTerm.var(var)
        ):
            return True
        if (
            isinstance(c, Letter)
            and c.letter != neutral
            and c.term == LinearTerm.var(var)
        ):
            return True
    return False


class _Eval:
    def __init__(self, w: WordModel, horizon: int):
        self.w = w
        self.h = horizon
        self.memo: dict = {}

    def run(self, f: Formula, env: Mapping[str, int]) -> bool:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, FalseF):
            return False
        fv = free_vars(f)
        key = (id(f), tuple(env[v] for v in sorted(fv)))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(f, (Letter, Less, Greater, Eq, Cong)):
            out = _atom_value(f, self.w, env)
        elif isinstance(f, Not):
            out = not self.run(f.sub, env)
        elif isinstance(f, And):
            out = self.run(f.lhs, env) and self.run(f.rhs, env)
        elif isinstance(f, Or):
            out = self.run(f.lhs, env) or self.run(f.rhs, env)
        elif isinstance(f, Quant):
            out = self.quant(f, env)
        else:
            raise TypeError(f"unknown formula node {f!r}")
        self.memo[key] = out
        return out

    def u_at(self, q: Quant, env: dict, pos: int) -> int:
        env[q.var] = pos
        ebodies = _effective_bodies(q)
        elem = q.monoid.identity
        for j, b in enumerate(ebodies):
            if self.run(b, env):
                elem = q.monoid.ordering[j]
                break
        del env[q.var]
        return elem

    def quant(self, q: Quant, env: Mapping[str, int]) -> bool:
        env = dict(env)
        m = q.monoid
        if _support_restricted(q, self.w.alphabet.neutral):
            acc = m.identity
            for pos in self.w.nnp:
                if pos >= self.h:
                    break
                acc = m.mul(acc, self.u_at(q, env, pos))
            return acc == q.target
        try:
            points, period = _change_points(q, env, self.w, self.h)
        except _Unsupported:
            points, period = None, 1
        if points is None:
            acc = m.identity
            for pos in range(self.h):
                acc = m.mul(acc, self.u_at(q, env, pos))
            return acc == q.target
        return self.quant_segments(q, env, points, period) == q.target

    def quant_segments(self, q: Quant, env: dict, points: list[int], period: int) -> int:
        m = q.monoid
        cuts = sorted({p for p in points if 0 <= p < self.h} | {0, self.h})
        acc = m.identity
        for a, b in zip(cuts, cuts[1:]):
            length = b - a
            if length <= 2 * period:
                for pos in range(a, b):
                    acc = m.mul(acc, self.u_at(q, env, pos))
                continue
            block = [self.u_at(q, env, a + i) for i in range(period)]
            h = m.identity
            prefix = [m.identity]
            for x in block:
                h = m.mul(h, x)
                prefix.append(h)
            full, rem = divmod(length, period)
            acc = m.mul(acc, _pow_element(m, h, full) if h != m.identity else m.identity)
            acc = m.mul(acc, prefix[rem])
        return acc


# --- event analysis for non-active quantifiers ------------------------------


def _term_parts(t: LinearTerm, var: str, env: Mapping[str, int]):
    """Split coeff*var + (value of env-vars + const) + unknown leftovers."""
    k = t.coeff(var)
    rest_val = t.const
    unknowns: dict[str, int] = {}
    for v, c in t.coeffs:
        if v == var:
            continue
        if v in env:
            rest_val += c * env[v]
        else:
            unknowns[v] = unknowns.get(v, 0) + c
    return k, rest_val, unknowns


def _crossing_points(k: int, rest: int) -> list[int]:
    # solutions around k*x + rest = 0
    x = Fraction(-rest, k)
    f = math.floor(x)
    return [f - 1, f, f + 1, f + 2]


def _change_points(q: Quant, env: Mapping[str, int], w: WordModel, h: int):
    """A sound superset of positions where the body vector can change,
    plus a period valid inside each stretch.  Raises _Unsupported when the
    bodies mix the quantified variable with more than one inner variable in
    a single atom."""
    var = q.var
    pts: set[int] = {0, 1}
    period = 1
    support = list(w.nnp)
    anchors: set[int] = set(support) | {0, 1, h - 1, h}
    mixed: list[tuple[int, int, int, list[int]]] = []  # (k_var, k_y, rest, targets)
    monoid_orders: set[int] = {q.monoid.n}
    coeff_factors: set[int] = set()

    for g in walk(q):
        if isinstance(g, Quant):
            monoid_orders.add(g.monoid.n)
        if not isinstance(g, (Letter, Less, Greater, Eq, Cong)):
            continue
        if isinstance(g, Letter):
            d = g.term
            targets = [p for p in support]
            kind = "letter"
        elif isinstance(g, Cong):
            d = g.rhs.sub(g.lhs)
            targets = [0]
            kind = "cong"
            period = math.lcm(period, g.q)
        else:
            d = g.lhs.sub(g.rhs)
            targets = [0]
            kind = "cmp"
        k, rest, unknowns = _term_parts(d, var, env)
        unknowns = {v: c for v, c in unknowns.items() if c != 0}
        if var not in d.vars and q.var != var:
            pass
        if not unknowns:
            if k == 0:
                continue
            if kind == "cong":
                continue  # periodic, handled by the period
            if kind == "letter":
                for t in targets:
                    num = t - rest
                    if num % k == 0:
                        p0 = num // k
                        pts.update((p0 - 1, p0, p0 + 1, p0 + 2))
                continue
            for t in targets:
                pts.update(_crossing_points(k, rest - t))
            continue
        if len(unknowns) > 1:
            raise _Unsupported
        (y, ky), = unknowns.items()
        coeff_factors.add(abs(ky))
        if k == 0:
            # pure inner-variable atom: contributes anchors for y
            if kind == "cong":
                period = math.lcm(period, g.q)
                continue
            for t in targets:
                num = t - rest
                if ky != 0:
                    x = Fraction(num, ky)
                    fl = math.floor(x)
                    anchors.update((fl - 1, fl, fl + 1, fl + 2))
            continue
        coeff_factors.add(abs(k))
        mixed.append((k, ky, rest, targets))

    if mixed:
        for f in coeff_factors:
            if f:
                period = math.lcm(period, f)
        period = math.lcm(period, lcm_all(monoid_orders))
        if period > 4000:
            raise _Unsupported
        window = period + 2
        for k, ky, rest, targets in mixed:
            for t in targets:
                for a in anchors:
                    # k*x + ky*a + rest = t  =>  x ~ (t - rest - ky*a)/k
                    x = Fraction(t - rest - ky * a, k)
                    center = math.floor(x)
                    pts.update(range(center - window, center + window + 1))
        # pairwise elimination of the shared inner variable
        for i in range(len(mixed)):
            for j in range(i + 1, len(mixed)):
                k1, ky1, r1, _ = mixed[i]
                k2, ky2, r2, _ = mixed[j]
                den = k1 * ky2 - k2 * ky1
                if den == 0:
                    continue
                x = Fraction(r2 * ky1 - r1 * ky2, den)
                center = math.floor(x)
                pts.update(range(center - window, center + window + 1))
    else:
        period = math.lcm(period, 1)

    if period > 4000 or len(pts) > 200000:
        raise _Unsupported
    return sorted(pts), period


# ---------------------------------------------------------------------------
# public evaluation API


def _max_env(a: Mapping[str, int]) -> int:
    return max([v for v in a.values()], default=-1)


def eval_finite(f: Formula, w: WordModel, a: Mapping[str, int], horizon: int) -> bool:
    """Finite-horizon semantics: quantifiers range over [0, horizon)."""
    need = 1 + max(w.max_support(), _max_env(a))
    if horizon < need:
        raise HorizonTooSmall(f"horizon {horizon} < required {need}")
    return _Eval(w, horizon).run(f, dict(a))


def eval_naive(f: Formula, w: WordModel, a: Mapping[str, int], horizon: int) -> bool:
    """Reference evaluator: every quantifier loops over all of [0, horizon)."""

    def rec(g: Formula, env: dict) -> bool:
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if isinstance(g, (Letter, Less, Greater, Eq, Cong)):
            return _atom_value(g, w, env)
        if isinstance(g, Not):
            return not rec(g.sub, env)
        if isinstance(g, And):
            return rec(g.lhs, env) and rec(g.rhs, env)
        if isinstance(g, Or):
            return rec(g.lhs, env) or rec(g.rhs, env)
        if isinstance(g, Quant):
            m = g.monoid
            ebodies = g.expanded_bodies()
            acc = m.identity
            for pos in range(horizon):
                env2 = dict(env)
                env2[g.var] = pos
                elem = m.identity
                for j, b in enumerate(ebodies):
                    if rec(b, env2):
                        elem = m.ordering[j]
                        break
                acc = m.mul(acc, elem)
            return acc == g.target
        raise TypeError(f"unknown node {g!r}")

    return rec(f, dict(a))


@dataclass
class EvalPolicy:
    h0: Optional[int] = None
    lam: Optional[int] = None
    probes: Optional[int] = None


def _formula_reach(f: Formula, w: WordModel, a: Mapping[str, int]) -> int:
    """A bound beyond which no term built from support/assignment values can land."""
    maxval = max(1, w.max_support(), _max_env(a))
    reach = 1
    for g in walk(f):
        if isinstance(g, (Letter, Less, Greater, Eq, Cong)):
            for t in (
                (g.term,) if isinstance(g, Letter) else (g.lhs, g.rhs)
            ):
                weight = abs(t.const) + sum(abs(c) for _, c in t.coeffs)
                reach = max(reach, weight)
    return reach * maxval + reach + 2


def default_horizon(f: Optional[Formula], w: WordModel, a: Mapping[str, int]) -> int:
    base = 2 * (1 + max(w.max_support(), _max_env(a), 0))
    if f is None:
        return max(base, 2)
    return max(base, 2 * _formula_reach(f, w, a))


def default_policy(f: Formula, w: WordModel, a: Mapping[str, int]) -> EvalPolicy:
    lam = lcm_all(congruence_moduli(f))
    orders = lcm_all(m.n for m in quantifier_monoids(f))
    h0 = default_horizon(f, w, a)
    h0 += (-h0) % lam  # align probes to the congruence period
    return EvalPolicy(h0=h0, lam=lam, probes=orders + 2)


def eval_omega(
    f: Formula,
    w: WordModel,
    a: Mapping[str, int],
    policy: Optional[EvalPolicy] = None,
    neutral: Optional[str] = None,
) -> OmegaVerdict:
    """Probe the omega-semantics at increasing horizons.

    Returns TRUE/FALSE when all probes agree, NON_CONVERGENT otherwise
    (the honest answer when the infinite product does not stabilize).
    """
    base = default_policy(f, w, a)
    if policy is not None:
        if policy.h0 is not None:
            base.h0 = policy.h0
        if policy.lam is not None:
            base.lam = policy.lam
        if policy.probes is not None:
            base.probes = policy.probes
    h0, lam, probes = base.h0, base.lam, base.probes
    if h0 < 2 * (1 + w.max_support()):
        raise HorizonTooSmall(
            f"h0 {h0} below 2*(1+max support) = {2 * (1 + w.max_support())}"
        )
    neutral = neutral if neutral is not None else w.alphabet.neutral
    if is_active_domain(f, neutral):
        # quantifiers only see the support: a single probe is exact
        return OmegaVerdict.of(eval_finite(f, w, a, h0))
    verdicts = {eval_finite(f, w, a, h0 + i * lam) for i in range(probes + 1)}
    if len(verdicts) == 1:
        return OmegaVerdict.of(verdicts.pop())
    return OmegaVerdict.NON_CONVERGENT


# ---------------------------------------------------------------------------
# exact interval-based quantifier oracle


def interval_eval_quant(
    bodies: Sequence[Formula],
    group: "GroupTable | MonoidTable",
    w: WordModel,
    a: Mapping[str, int],
    boundary: "BoundarySetLike",
    var: str = "z",
) -> Optional[int]:
    """Exact infinite product of u over all positions, or None when undefined.

    Requires active-domain bodies: inside an interval the body truth depends
    only on the position's residue class mod q.
    """
    neutral = w.alphabet.neutral
    for b in bodies:
        if not is_active_domain(b, neutral):
            raise BodiesNotActiveDomain("bodies must be active-domain formulas")
    q = boundary.ctx.q
    pts = list(boundary.points)
    horizon = (max(pts) if pts else 0) + q + 2
    ev = _Eval(w, max(horizon, 1 + max(w.max_support(), _max_env(a))) + 1)

    def u(i: int) -> int:
        env = dict(a)
        env[var] = i
        for j, b in enumerate(bodies):
            if ev.run(b, env):
                return group.ordering[j]
        return group.identity

    # the infinite tail: any witness there makes the product undefined
    tail_base = (pts[-1] if pts else -1) + 1
    for i in range(tail_base, tail_base + q):
        if u(i) != group.identity:
            return None

    acc = group.identity
    prev = -1
    for b in pts:
        lo, hi = prev + 1, b - 1  # the open interval (prev, b)
        length = hi - lo + 1
        if length > 0:
            if length <= q:
                for i in range(lo, hi + 1):
                    acc = group.mul(acc, u(i))
            else:
                block = [u(lo + i) for i in range(q)]
                h = group.identity
                prefix = [group.identity]
                for x in block:
                    h = group.mul(h, x)
                    prefix.append(h)
                full, rem = divmod(length, q)
                acc = group.mul(acc, _pow_element(group, h, full))
                acc = group.mul(acc, prefix[rem])
        acc = group.mul(acc, u(b))
        prev = b
    return acc


class BoundarySetLike:
    """Protocol-ish: anything with .points and .ctx (see boundary module)."""

    points: tuple
    ctx: object


# ---------------------------------------------------------------------------
# N_k / N-hat_k oracles


class NkComputation:
    """Brute-force computation of the N_k / N-hat_k group elements.

    Levels process the offset families in the fixed T order; a boundary
    value already seen at an earlier level is not multiplied again.
    """

    def __init__(self, ctx, w: WordModel, a: Mapping[str, int]):
        from .boundary import boundary_points  # local import to avoid a cycle

        self.ctx = ctx
        self.w = w
        self.a = dict(a)
        self.group = as_group(ctx.monoid)
        self.bset = boundary_points(w, self.a, ctx)
        self.points = list(self.bset.points)
        self.p = ctx.p
        seen: set[int] = set()
        self.levels: list[list[int]] = []
        for t in ctx.T:
            vals = sorted(v for v in self.bset.per_offset[t] if v not in seen)
            seen |= set(vals)
            self.levels.append(vals)
        horizon = self.align(max(self.points)) + self.p + 2
        self._ev = _Eval(w, max(horizon, 1 + max(w.max_support(), _max_env(self.a))) + 1)
        self._u: dict[int, int] = {}
        self._n: dict[tuple[int, int], int] = {}
        self._nhat: dict[tuple[int, int], int] = {}

    def align(self, x: int) -> int:
        """Smallest multiple of p that is >= x."""
        return x + ((-x) % self.p)

    def u(self, i: int) -> int:
        hit = self._u.get(i)
        if hit is not None:
            return hit
        env = dict(self.a)
        env[self.ctx.z] = i
        elem = self.group.identity
        for j, b in enumerate(self.ctx.bodies):
            if self._ev.run(b, env):
                elem = self.group.ordering[j]
                break
        self._u[i] = elem
        return elem

    def u_product(self, lo: int, hi: int) -> int:
        """Product of u over the closed range [lo, hi]."""
        acc = self.group.identity
        for i in range(lo, hi + 1):
            acc = self.group.mul(acc, self.u(i))
        return acc

    def _succ(self, b: int) -> Optional[int]:
        for x in self.points:
            if x > b:
                return x
        return None

    def _pred(self, b: int) -> Optional[int]:
        out = None
        for x in self.points:
            if x < b:
                out = x
            else:
                break
        return out

    def n0(self, b: int) -> int:
        nxt = self._succ(b)
        ir = math.inf if nxt is None else nxt - b - 1
        if ir < self.p:
            return self.u_product(b + 1, b + int(ir))
        s = self.align(b)
        return self.u_product(b + 1, s)

    def nhat0(self, b: int) -> int:
        prd = self._pred(b)
        il = b if prd is None else b - prd - 1
        if il < self.p:
            return self.group.identity
        t = b - 1 - ((b - 1) % self.p)  # largest multiple of p <= b-1
        return self.u_product(b - self.p, t)

    def x_term(self, k: int, b: int) -> int:
        g = self.group
        return g.mul(g.mul(g.inv(self.nhat(k - 1, b)), self.u(b)), self.n(k - 1, b))

    def n(self, k: int, b: int) -> int:
        if k == 0:
            return self.n0(b)
        key = (k, b)
        hit = self._n.get(key)
        if hit is not None:
            return hit
        acc = self.n(k - 1, b)
        for bp in self.levels[k - 1]:
            if bp > b:
                acc = self.group.mul(acc, self.x_term(k, bp))
        self._n[key] = acc
        return acc

    def nhat(self, k: int, b: int) -> int:
        if k == 0:
            return self.nhat0(b)
        key = (k, b)
        hit = self._nhat.get(key)
        if hit is not None:
            return hit
        acc = self.nhat(k - 1, b)
        for bp in self.levels[k - 1]:
            if bp > b:
                acc = self.group.mul(acc, self.x_term(k, bp))
        self._nhat[key] = acc
        return acc

    def total_product_brute(self) -> int:
        return self.u_product(0, self.align(max(self.points)))


def nk_oracle(w: WordModel, a: Mapping[str, int], k: int, b: int, ctx) -> int:
    comp = NkComputation(ctx, w, a)
    if b not in comp.points:
        raise NotBoundaryPoint(f"{b} is not a boundary point")
    return comp.n(k, b)


def nkhat_oracle(w: WordModel, a: Mapping[str, int], k: int, b: int, ctx) -> int:
    comp = NkComputation(ctx, w, a)
    if b not in comp.points:
        raise NotBoundaryPoint(f"{b} is not a boundary point")
    return comp.nhat(k, b)
