import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adcollapse import syntax as sx
from adcollapse.algebra import make_cyclic, make_u1, resolve_monoid
from adcollapse.errors import ArityMismatch, ParseError
from adcollapse.semantics import eval_omega, OmegaVerdict
from adcollapse.words import make_alphabet, word

C2 = make_cyclic(2)
C3 = make_cyclic(3)
U1 = make_u1()
AB = make_alphabet(["a", "b", "1"], neutral="_")


def t(**kw):
    const = kw.pop("const", 0)
    return sx.LinearTerm.of(kw, const)


def test_linear_term_basics():
    x = sx.LinearTerm.var("x")
    assert x.add(x) == t(x=2)
    assert t(x=2, const=3).evaluate({"x": 5}) == 13
    assert t(x=1).sub(t(x=1)) == sx.ZERO
    assert t(x=-2, y=1).split() == (t(y=1), t(x=2))
    assert t(x=3).subst_var("x", t(y=1, const=2)) == t(y=3, const=6)


def test_parse_simple_atoms():
    f = sx.parse("x < y + 3")
    assert f == sx.Less(t(x=1), t(y=1, const=3))
    f = sx.parse("2*x = z")
    assert f == sx.Eq(t(x=2), t(z=1))
    f = sx.parse("x =mod 2 y")
    assert f == sx.Cong(2, t(x=1), t(y=1))
    f = sx.parse("'a'(x)")
    assert f == sx.Letter("a", t(x=1))


def test_parse_quantifier():
    f = sx.parse("Q{C2,1} z . <'1'(z)>")
    assert isinstance(f, sx.Quant)
    assert f.monoid.label == "C2"
    assert f.target == 1
    assert f.bodies == (sx.Letter("1", t(z=1)),)


def test_parse_exists_sugar():
    f = sx.parse("E z . 'a'(z)")
    assert isinstance(f, sx.Quant)
    assert f.monoid.label == "U1"
    assert f.monoid.element_name(f.target) == "0"
    assert f.bodies == (sx.Letter("a", t(z=1)),)


def test_parse_arity_mismatch():
    with pytest.raises(ParseError):
        sx.parse("Q{C3,g} z . <'a'(z)>")


def test_parse_guard_arity_checked():
    with pytest.raises(ParseError):
        sx.parse("Q{C2,0} z ['_'(z)] . <'a'(z), 'b'(z)>")


def test_parse_guard_ok():
    f = sx.parse("Q{C2,0} z [!'_'(z)] . <'a'(z)>")
    assert isinstance(f, sx.Quant)
    assert f.guard == sx.Not(sx.Letter("_", t(z=1)))
    assert sx.is_active_domain(f, "_")


def test_boolean_precedence():
    f = sx.parse("'a'(x) & 'b'(x) | true")
    assert isinstance(f, sx.Or)
    assert isinstance(f.lhs, sx.And)


def test_roundtrip_examples():
    for text in [
        "Q{C2,1} z . <'1'(z)>",
        "Q{C3,2} z [!'_'(z)] . <'a'(z), 'b'(z)>",
        "(x < y & !(x = y))",
        "E z . 'a'(z)",
        "x + 2*y =mod 3 5",
        "Q{S3,(123)} z . <'a'(z), 'b'(z), 'a'(z), 'b'(z), 'a'(z)>",
    ]:
        f = sx.parse(text)
        assert sx.parse(sx.print_formula(f)) == f


def test_print_shifts_negative_terms():
    f = sx.Less(t(x=-2), t(const=1))
    assert sx.print_formula(f) == "0 < 1 + 2*x"
    assert sx.parse(sx.print_formula(f)) == sx.Less(sx.ZERO, t(x=2, const=1))


def test_relativize():
    q = sx.parse("Q{C2,0} z . <'a'(z)>")
    guard = sx.parse("!'_'(z)")
    rq = sx.relativize(q, guard)
    assert rq.guard == guard
    assert rq.expanded_bodies() == (sx.conj(guard, q.bodies[0]),)
    # guard true keeps bodies unchanged
    assert sx.relativize(q, sx.TRUE).expanded_bodies() == (
        sx.conj(sx.TRUE, q.bodies[0]),
    )


def test_relativize_false_guard_collapses():
    q = sx.parse("Q{C2,0} z . <'a'(z)>")
    f = sx.make_quant(q.monoid, q.target, q.var, q.bodies, guard=sx.FALSE)
    assert f == sx.TRUE  # target is the identity
    f2 = sx.make_quant(q.monoid, 1, q.var, q.bodies, guard=sx.FALSE)
    assert f2 == sx.FALSE


def test_is_active_domain_cases():
    assert sx.is_active_domain(sx.parse("x < y"), "_")
    assert not sx.is_active_domain(sx.parse("Q{U1,0} x . <'a'(x)>"), "_")
    assert sx.is_active_domain(sx.parse("Q{U1,0} x [!'_'(x)] . <'a'(x)>"), "_")


def test_subst_capture_avoided():
    # substituting a term mentioning x into a formula binding x renames
    f = sx.parse("Q{U1,0} x . <x = z>")
    g = sx.subst_term(f, "z", t(x=2))
    assert isinstance(g, sx.Quant)
    assert g.var != "x"
    assert g.bodies[0] == sx.Eq(sx.LinearTerm.var(g.var), t(x=2))


def test_freshen_bound():
    f = sx.parse("Q{U1,0} x . <(x = z & Q{U1,0} x . <x < z>)>")
    g = sx.freshen_bound(f)
    binders = [q.var for q in sx.walk(g) if isinstance(q, sx.Quant)]
    assert len(set(binders)) == len(binders)


# --- normalize ---------------------------------------------------------------


def test_normalize_scales_and_adds_congruence():
    # 2z < x becomes z < 2x (as z' = 2z) conjoined with z' =mod 2 0
    f = sx.parse("z + z < x")
    nf = sx.normalize(f, "z", monoid=C2)
    assert nf.divisor == 2
    expected = sx.conj(
        sx.Less(t(z=1), t(x=1)), sx.Cong(2, t(z=1), sx.ZERO)
    )
    assert nf.formula == expected


def test_normalize_no_z_unchanged():
    f = sx.parse("x < y")
    nf = sx.normalize(f, "z", monoid=C2)
    assert nf.divisor == 1
    assert nf.formula == f


def test_normalize_letter_atom_on_z():
    f = sx.parse("'a'(z)")
    nf = sx.normalize(f, "z", monoid=C2, neutral="_")
    q = nf.formula
    assert isinstance(q, sx.Quant)
    assert q.monoid.label == "C2"
    assert sx.is_active_domain(q, "_")
    # the z-atom inside is an equality with z on the left
    eqs = [g for g in sx.walk(q) if isinstance(g, sx.Eq)]
    assert any(g.lhs == t(z=1) for g in eqs)


def test_normalize_neutral_letter_atom():
    f = sx.parse("'_'(z)")
    nf = sx.normalize(f, "z", monoid=C2, neutral="_")
    assert isinstance(nf.formula, sx.Not)


def test_normalize_is_semantics_preserving():
    # quantifier-level preservation under the witness bijection z' = n*z
    ab = make_alphabet(["a"], neutral="_")
    w = word(ab, {4: "a", 6: "a"})
    for body_text, target in [("'a'(z)", 0), ("z + z < x", 1), ("z = x", 0)]:
        body = sx.parse(body_text)
        before = sx.Quant(C2, target, "z", (body,))
        bodies_hat, n = sx.normalize_bodies([body], "z", monoid=C2, neutral="_")
        after = sx.Quant(C2, target, "z", bodies_hat)
        env = {"x": 5} if "x" in sx.free_vars(body) else {}
        assert eval_omega(before, w, env) == eval_omega(after, w, env)


def test_quant_arity_checked():
    with pytest.raises(ArityMismatch):
        sx.Quant(C3, 0, "z", (sx.TRUE,))


# --- property-based round trip ----------------------------------------------

_vars = st.sampled_from(["x", "y", "z"])
_terms = st.builds(
    lambda pairs, c: sx.LinearTerm.of(pairs, c),
    st.lists(st.tuples(_vars, st.integers(min_value=0, max_value=3)), max_size=2),
    st.integers(min_value=0, max_value=9),
)
_letters = st.sampled_from(["a", "b", "_"])


def _formulas(depth: int):
    atoms = st.one_of(
        st.just(sx.TRUE),
        st.just(sx.FALSE),
        st.builds(sx.Less, _terms, _terms),
        st.builds(sx.Greater, _terms, _terms),
        st.builds(sx.Eq, _terms, _terms),
        st.builds(lambda q, a, b: sx.Cong(q, a, b), st.integers(2, 5), _terms, _terms),
        st.builds(sx.Letter, _letters, _terms),
    )
    if depth == 0:
        return atoms
    sub = _formulas(depth - 1)
    return st.one_of(
        atoms,
        st.builds(sx.Not, sub),
        st.builds(sx.And, sub, sub),
        st.builds(sx.Or, sub, sub),
        st.builds(
            lambda v, b, g: sx.Quant(C2, 1, v, (b,), guard=g),
            _vars,
            sub,
            st.one_of(st.none(), sub),
        ),
        st.builds(lambda v, b1, b2: sx.Quant(C3, 2, v, (b1, b2)), _vars, sub, sub),
    )


@given(_formulas(2))
@settings(max_examples=120, deadline=None)
def test_print_parse_roundtrip(f):
    assert sx.parse(sx.print_formula(f)) == f
