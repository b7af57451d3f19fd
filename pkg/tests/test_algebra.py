import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adcollapse import algebra
from adcollapse.errors import InvalidOrder, NotAssociative, NoIdentity, SizeCap, TooLarge


def test_u1_is_valid_monoid():
    u1 = algebra.make_u1()
    assert u1.n == 2
    assert u1.identity == u1.element_index("1")
    assert u1.mul(0, 0) == 0
    assert not u1.is_group()


def test_trivial_monoid():
    m = algebra.make_monoid([[0]], identity=0)
    assert m.n == 1
    assert m.ordering == ()


def test_non_associative_rejected():
    # (1*2)*2 = 0 but 1*(2*2) = 1
    with pytest.raises(NotAssociative):
        algebra.make_monoid([[0, 1, 2], [1, 0, 2], [2, 2, 0]], identity=0)
    # identity law failure
    with pytest.raises(NoIdentity):
        algebra.make_monoid([[0, 0], [0, 0]], identity=0)


def test_cyclic_groups():
    c2 = algebra.make_cyclic(2)
    assert c2.mul(1, 1) == 0
    c1 = algebra.make_cyclic(1)
    assert c1.n == 1
    c3 = algebra.make_cyclic(3)
    assert c3.mul(1, 2) == c3.identity
    with pytest.raises(InvalidOrder):
        algebra.make_cyclic(0)


def test_symmetric_group_sizes():
    assert algebra.make_symmetric(3).n == 6
    assert algebra.make_symmetric(2).n == 2
    assert algebra.make_symmetric(5).n == 120
    with pytest.raises(TooLarge):
        algebra.make_symmetric(6)


def test_s3_composition_order_sensitive():
    s3 = algebra.make_symmetric(3)
    a = s3.element_index("(12)")
    b = s3.element_index("(23)")
    assert s3.element_name(algebra.product(s3, [a, b])) == "(123)"
    assert s3.element_name(algebra.product(s3, [b, a])) == "(132)"


def test_product_identity_cases():
    c2 = algebra.make_cyclic(2)
    assert algebra.product(c2, [1, 1]) == c2.identity
    assert algebra.product(c2, []) == c2.identity


def test_divides_examples():
    c2 = algebra.make_cyclic(2)
    s3 = algebra.make_symmetric(3)
    u1 = algebra.make_u1()
    assert algebra.divides(c2, s3)
    assert algebra.divides(s3, s3)
    assert not algebra.divides(u1, c2)
    with pytest.raises(SizeCap):
        algebra.divides(algebra.make_symmetric(4), s3)


def test_s2_isomorphic_to_c2():
    assert algebra.divides(algebra.make_symmetric(2), algebra.make_cyclic(2))
    assert algebra.divides(algebra.make_cyclic(2), algebra.make_symmetric(2))


@given(
    st.lists(st.integers(min_value=0, max_value=5), max_size=6),
    st.lists(st.integers(min_value=0, max_value=5), max_size=6),
)
@settings(max_examples=60, deadline=None)
def test_product_concat_homomorphic(s1, s2):
    s3 = algebra.make_symmetric(3)
    lhs = algebra.product(s3, s1 + s2)
    rhs = s3.mul(algebra.product(s3, s1), algebra.product(s3, s2))
    assert lhs == rhs


@given(st.lists(st.integers(min_value=0, max_value=5), max_size=6))
@settings(max_examples=60, deadline=None)
def test_group_inverse_fold(seq):
    s3 = algebra.make_symmetric(3)
    inverted = [s3.inv(x) for x in reversed(seq)]
    assert algebra.product(s3, seq + inverted) == s3.identity


def test_element_order_divides_group_order():
    s3 = algebra.make_symmetric(3)
    for a in s3.elements():
        assert s3.n % algebra.element_order(s3, a) == 0


def test_monoid_from_json_roundtrip():
    data = {
        "elements": ["1", "a"],
        "identity": "1",
        "table": [["1", "a"], ["a", "1"]],
    }
    m = algebra.monoid_from_json(data, label="Z2")
    assert m.is_group()
    assert m.mul(m.element_index("a"), m.element_index("a")) == m.identity


def test_resolve_monoid_builtins():
    assert algebra.resolve_monoid("U1").label == "U1"
    assert algebra.resolve_monoid("C4").n == 4
    assert algebra.resolve_monoid("S3").n == 6
