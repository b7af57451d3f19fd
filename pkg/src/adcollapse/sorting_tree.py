"""The sorting tree: left-to-right leaves enumerate B_t in ascending order.

The tree is a test oracle; the collapse transformation mirrors its recursion
syntactically without ever materializing it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .boundary import CollapseContext, FFunc
from .errors import BaseTooSmall
from .syntax import LinearTerm


@dataclass(frozen=True)
class TreeNode:
    f: FFunc
    assignment: tuple[int, ...]
    value: int
    is_leaf: bool
    children: tuple["TreeNode", ...]
    delta: int
    base: int

    def describe(self) -> str:
        kind = "leaf" if self.is_leaf else "node"
        return f"{kind} {self.f.describe()} @ {self.assignment} = {self.value}"


def build(
    t: LinearTerm,
    nnp: Sequence[int],
    ctx: CollapseContext,
    a: Mapping[str, int],
    base: Optional[int] = None,
) -> TreeNode:
    """Build the sorting tree for the offset t over the given support."""
    r = base if base is not None else ctx.r_phi
    if r <= 3 * ctx.s * ctx.delta:
        raise BaseTooSmall(f"base {r} <= 3*s*delta = {3 * ctx.s * ctx.delta}")
    support = sorted(nnp)
    delta, s = ctx.delta, ctx.s

    def node(f: FFunc, assignment: tuple[int, ...]) -> TreeNode:
        value = f.value(assignment, a)
        arity = f.arity
        avail = [j for j in support if (not assignment) or j < assignment[-1]]
        if arity >= s or not avail:
            middle = TreeNode(f, assignment, value, True, (), delta, r)
            return TreeNode(f, assignment, value, False, (middle,), delta, r)
        left = [
            node(FFunc(f.coeffs + (alpha,), f.offset), assignment + (j,))
            for j in sorted(avail, reverse=True)
            for alpha in range(-delta, 0)
        ]
        middle = TreeNode(f, assignment, value, True, (), delta, r)
        right = [
            node(FFunc(f.coeffs + (alpha,), f.offset), assignment + (j,))
            for j in sorted(avail)
            for alpha in range(1, delta + 1)
        ]
        return TreeNode(f, assignment, value, False, tuple(left + [middle] + right), delta, r)

    return node(FFunc(coeffs=(), offset=t), ())


def all_leaf_values(tree: TreeNode) -> list[int]:
    """Left-to-right leaf values, including negative ones."""
    if tree.is_leaf:
        return [tree.value]
    out: list[int] = []
    for c in tree.children:
        out.extend(all_leaf_values(c))
    return out


def leaves(tree: TreeNode) -> list[int]:
    """Left-to-right leaf values restricted to positions (>= 0).

    As a set this equals B_t; the sequence is non-decreasing.
    """
    return [v for v in all_leaf_values(tree) if v >= 0]


def check_child_bounds(node: TreeNode) -> bool:
    """Children of an internal node stay within f(A) +- delta*r^(c-1) and ascend."""
    if node.is_leaf or not node.children:
        return True
    values = [c.value for c in node.children]
    if any(v1 > v2 for v1, v2 in zip(values, values[1:])):
        return False
    if not node.assignment:
        return True  # no constraint at the root
    low = min(node.assignment)
    # low = r^c for some c >= 1 when nnp is a subset of D_r
    bound = node.delta * (low // node.base)
    return all(abs(c.value - node.value) <= bound for c in node.children)


def check_neighbor_separation(node: TreeNode) -> bool:
    """Strict separation between the leaf ranges of adjacent siblings."""
    if node.is_leaf:
        return True
    for left, right in zip(node.children, node.children[1:]):
        if max(all_leaf_values(left)) >= min(all_leaf_values(right)):
            return False
    return all(check_neighbor_separation(c) for c in node.children)


def render(tree: TreeNode, indent: int = 0) -> str:
    pad = "  " * indent
    mark = "**" if tree.is_leaf else ""
    label = f"({tree.f.describe()}) @ {tree.assignment} = {tree.value} {mark}".rstrip()
    lines = [pad + label]
    for c in tree.children:
        lines.append(render(c, indent + 1))
    return "\n".join(lines)
