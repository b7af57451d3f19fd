"""Sparse models of words in Sigma* lambda^omega and the domains D_r.

A word is stored as its finite support (position -> non-neutral letter);
positions outside the support read the neutral letter.  Supports over D_r
grow exponentially, so dense arrays are never materialized here.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import AdcError, TargetTooSmall


@dataclass(frozen=True)
class Alphabet:
    letters: tuple[str, ...]
    neutral: str

    def __post_init__(self):
        if self.neutral not in self.letters:
            raise AdcError(f"neutral letter {self.neutral!r} not in alphabet")

    @property
    def non_neutral(self) -> tuple[str, ...]:
        return tuple(c for c in self.letters if c != self.neutral)


def make_alphabet(letters: Iterable[str], neutral: str = "_") -> Alphabet:
    ls = tuple(dict.fromkeys(list(letters) + [neutral]))
    return Alphabet(letters=ls, neutral=neutral)


@dataclass(frozen=True)
class WordModel:
    """An element of Sigma* lambda^omega as a sorted sparse support map."""

    alphabet: Alphabet
    support: tuple[tuple[int, str], ...]

    def __post_init__(self):
        prev = -1
        for pos, letter in self.support:
            if pos <= prev:
                raise AdcError("support positions must be strictly increasing")
            if pos < 0:
                raise AdcError("support positions must be non-negative")
            if letter == self.alphabet.neutral:
                raise AdcError("support must not map to the neutral letter")
            if letter not in self.alphabet.letters:
                raise AdcError(f"letter {letter!r} not in alphabet")
            prev = pos

    @property
    def nnp(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.support)

    def max_support(self) -> int:
        """Largest non-neutral position, or -1 for the all-neutral word."""
        return self.support[-1][0] if self.support else -1


def word(alphabet: Alphabet, support: dict[int, str] | Iterable[tuple[int, str]]) -> WordModel:
    items = sorted(dict(support).items()) if isinstance(support, dict) else sorted(support)
    return WordModel(alphabet=alphabet, support=tuple(items))


def letter_at(w: WordModel, i: int) -> str:
    for pos, letter in w.support:
        if pos == i:
            return letter
        if pos > i:
            break
    return w.alphabet.neutral


def insert_neutral(w: WordModel, at: int) -> WordModel:
    """Insert one neutral letter at position `at`; later positions shift up."""
    return WordModel(
        alphabet=w.alphabet,
        support=tuple((p + 1 if p >= at else p, c) for p, c in w.support),
    )


def delete_neutral(w: WordModel, at: int) -> WordModel:
    """Delete the (neutral) position `at`; later positions shift down."""
    if letter_at(w, at) != w.alphabet.neutral:
        raise AdcError(f"position {at} is not neutral")
    return WordModel(
        alphabet=w.alphabet,
        support=tuple((p - 1 if p > at else p, c) for p, c in w.support),
    )


@dataclass(frozen=True)
class DomainDr:
    """The admissible-position domain D_r = {r^i | 0 < i <= max_exp}."""

    r: int
    max_exp: int = 6

    def __post_init__(self):
        if self.r < 2:
            raise AdcError(f"domain base must be >= 2, got {self.r}")

    def positions(self) -> list[int]:
        return [self.r ** i for i in range(1, self.max_exp + 1)]

    def member(self, x: int) -> bool:
        v = self.r
        for _ in range(self.max_exp):
            if v == x:
                return True
            if v > x:
                return False
            v *= self.r
        return False


def sample_word(
    d: DomainDr, alphabet: Alphabet, count: int, seed: int
) -> WordModel:
    """Deterministically sample a word whose support lies in D_r."""
    if count > d.max_exp:
        raise AdcError(f"count {count} exceeds max_exp {d.max_exp}")
    rng = random.Random(seed)
    positions = sorted(rng.sample(d.positions(), count))
    letters = alphabet.non_neutral
    return word(alphabet, [(p, rng.choice(letters)) for p in positions])


def embed_order_preserving(w: WordModel, target: Iterable[int]) -> WordModel:
    """Place the i-th non-neutral letter of w at the i-th target position."""
    slots = sorted(target)
    if len(slots) < len(w.support):
        raise TargetTooSmall(
            f"target has {len(slots)} slots for {len(w.support)} letters"
        )
    return WordModel(
        alphabet=w.alphabet,
        support=tuple((slots[i], c) for i, (_, c) in enumerate(w.support)),
    )


_SPARSE_RE = re.compile(r"^\s*neutral\s*=\s*(\S+)\s*;\s*w\s*=\s*\{(.*)\}\s*$")


def parse_word_literal(text: str, alphabet: Optional[Alphabet] = None) -> WordModel:
    """Parse a word literal: sparse "neutral=_; w={5:a,25:b}" or dense "..a.b"."""
    m = _SPARSE_RE.match(text)
    if m:
        neutral = m.group(1)
        body = m.group(2).strip()
        items: list[tuple[int, str]] = []
        if body:
            for part in body.split(","):
                pos_s, letter = part.split(":")
                items.append((int(pos_s.strip()), letter.strip()))
        letters = [c for _, c in items]
        ab = alphabet or make_alphabet(letters, neutral=neutral)
        return word(ab, items)
    # dense form, dot = neutral
    items = [(i, c) for i, c in enumerate(text.strip()) if c != "."]
    ab = alphabet or make_alphabet([c for _, c in items])
    return word(ab, items)


def format_word(w: WordModel) -> str:
    body = ",".join(f"{p}:{c}" for p, c in w.support)
    return f"neutral={w.alphabet.neutral}; w={{{body}}}"
