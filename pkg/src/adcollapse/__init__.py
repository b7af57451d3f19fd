"""Constructive collapse of monoid-quantifier formulas over (N,<,+).

For words with a neutral letter whose non-neutral positions lie in a sparse
domain D_r, every formula of the logic with order, addition, and modular
congruences collapses to an active-domain formula, and from there, via a
finite Ramsey step, to an order-only formula.  This package implements the
transformation together with exact evaluation semantics and brute-force
verification harnesses for every step.
"""

from . import algebra, boundary, collapse, harness, semantics, sorting_tree, syntax, words

__all__ = [
    "algebra",
    "boundary",
    "collapse",
    "harness",
    "semantics",
    "sorting_tree",
    "syntax",
    "words",
]

__version__ = "0.1.0"
