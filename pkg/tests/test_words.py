import pytest

from adcollapse import words
from adcollapse.errors import AdcError, TargetTooSmall

AB = words.make_alphabet(["a", "b"], neutral="_")


def test_letter_at():
    w = words.word(AB, {5: "a"})
    assert words.letter_at(w, 5) == "a"
    assert words.letter_at(w, 6) == "_"
    empty = words.word(AB, {})
    assert words.letter_at(empty, 0) == "_"


def test_insert_neutral_shifts():
    w = words.word(AB, {5: "a", 7: "b"})
    assert words.insert_neutral(w, 6).support == ((5, "a"), (8, "b"))
    assert words.insert_neutral(words.word(AB, {0: "a"}), 0).support == ((1, "a"),)


def test_insert_delete_inverse():
    w = words.word(AB, {5: "a", 7: "b"})
    assert words.delete_neutral(words.insert_neutral(w, 6), 6) == w
    with pytest.raises(AdcError):
        words.delete_neutral(w, 5)


def test_nnp_letter_sequence_preserved():
    w = words.word(AB, {2: "a", 9: "b"})
    w2 = words.insert_neutral(w, 4)
    assert [c for _, c in w.support] == [c for _, c in w2.support]


def test_domain_membership():
    d = words.DomainDr(r=5, max_exp=4)
    assert d.positions() == [5, 25, 125, 625]
    assert d.member(25)
    assert not d.member(5**5)
    assert not d.member(1)
    with pytest.raises(AdcError):
        words.DomainDr(r=1)


def test_sample_word_support_in_domain():
    d = words.DomainDr(r=5, max_exp=5)
    w = words.sample_word(d, AB, count=3, seed=7)
    assert len(w.support) == 3
    assert all(d.member(p) for p in w.nnp)


def test_sample_word_deterministic():
    d = words.DomainDr(r=3, max_exp=5)
    assert words.sample_word(d, AB, 2, seed=11) == words.sample_word(d, AB, 2, seed=11)


def test_sample_word_empty():
    d = words.DomainDr(r=3)
    assert words.sample_word(d, AB, 0, seed=0).support == ()


def test_embed_order_preserving():
    w = words.word(AB, {0: "a", 1: "b"})
    out = words.embed_order_preserving(w, [25, 5])
    assert out.support == ((5, "a"), (25, "b"))
    assert words.embed_order_preserving(words.word(AB, {}), [5]).support == ()
    assert words.embed_order_preserving(words.word(AB, {2: "a"}), [625]).support == ((625, "a"),)
    with pytest.raises(TargetTooSmall):
        words.embed_order_preserving(w, [3])


def test_word_literals_both_forms():
    w1 = words.parse_word_literal("neutral=_; w={5:a,25:b}")
    assert w1.support == ((5, "a"), (25, "b"))
    w2 = words.parse_word_literal("..a.b")
    assert w2.support == ((2, "a"), (4, "b"))
    assert words.parse_word_literal(words.format_word(w1), alphabet=w1.alphabet) == w1
