"""Isomorphism of finite rooted trees with at most two children per node.

Canonical codes follow Aho, Hopcroft and Ullman: a node is encoded as
``1, <sorted child codes>, 0``.  Children are unordered, so sorting the child
codes makes the code a complete isomorphism invariant.
"""

from __future__ import annotations

from itertools import permutations
from typing import Optional

from .core import Element, StructureHandle, TreeSlice, tree_slice
from .errors import DepthMismatch, NotATree, TooLarge

CanonCode = tuple

BRUTE_FORCE_LIMIT = 12


def canonical_code(T: TreeSlice) -> CanonCode:
    if T.cyclic_root:
        raise NotATree(f"slice rooted at {T.root} re-enters a cycle")
    kids = T.children_map()
    codes: dict = {}
    for level in reversed(T.levels):
        for v in level:
            parts = sorted(codes[c] for c in kids.get(v, ()))
            codes[v] = (1,) + tuple(x for p in parts for x in p) + (0,)
    return codes[T.root]


def is_isomorphic(T1: TreeSlice, T2: TreeSlice) -> bool:
    if T1.depth != T2.depth:
        raise DepthMismatch(f"depth {T1.depth} vs {T2.depth}")
    return canonical_code(T1) == canonical_code(T2)


def brute_force_isomorphic(T1: TreeSlice, T2: TreeSlice) -> bool:
    """Exhaustive search over child orderings; test oracle only."""
    for T in (T1, T2):
        if T.cyclic_root:
            raise NotATree(f"slice rooted at {T.root} re-enters a cycle")
        if T.size() > BRUTE_FORCE_LIMIT:
            raise TooLarge(f"{T.size()} nodes > {BRUTE_FORCE_LIMIT}")
    k1, k2 = T1.children_map(), T2.children_map()

    def match(u, v):
        a, b = k1.get(u, []), k2.get(v, [])
        if len(a) != len(b):
            return False
        return any(all(match(x, y) for x, y in zip(a, p)) for p in permutations(b))

    return match(T1.root, T2.root)


def tree_from_children(children: dict, root: Element = 0, depth: Optional[int] = None) -> TreeSlice:
    """Build a slice from an explicit ``parent -> [children]`` map.

    ``depth`` defaults to the height of the tree; deeper levels are empty.
    """
    levels = [frozenset({root})]
    edges = set()
    while True:
        nxt = set()
        for v in levels[-1]:
            for c in children.get(v, ()):
                edges.add((c, v))
                nxt.add(c)
        if not nxt:
            break
        levels.append(frozenset(nxt))
    height = len(levels) - 1
    if depth is None:
        depth = height
    if depth < height:
        raise ValueError(f"depth {depth} is less than the tree height {height}")
    levels += [frozenset()] * (depth - height)
    return TreeSlice(root, depth, tuple(levels), frozenset(edges), complete=True)


def separating_level(
    SA: StructureHandle, x1: Element, x2: Element, level_cap: int, bound: int
) -> Optional[int]:
    """Least ``n <= level_cap`` where the depth-``n`` trees of x1 and x2 differ.

    A cyclic-root truncation never matches a genuine tree.  Returns ``None``
    when no such level exists up to the cap.
    """
    if x1 == x2:
        raise ValueError("x1 and x2 must differ")
    for n in range(level_cap + 1):
        t1 = tree_slice(SA, x1, n, bound)
        t2 = tree_slice(SA, x2, n, bound)
        if t1.cyclic_root != t2.cyclic_root:
            return n
        if t1.cyclic_root:
            raise NotATree(f"both {x1} and {x2} reach cycles through their trees")
        if canonical_code(t1) != canonical_code(t2):
            return n
    return None


def enumerate_shapes(max_nodes: int, ordered: bool = False) -> list:
    """All rooted trees with at most ``max_nodes`` nodes and arity <= 2.

    Each tree is a nested tuple of child subtrees.  With ``ordered`` the two
    children of a node are ordered, which yields several representatives of
    the same unordered tree.
    """
    by_size: dict = {1: [()]}
    for n in range(2, max_nodes + 1):
        out = [(t,) for t in by_size[n - 1]]
        for a in range(1, n - 1):
            b = n - 1 - a
            if not ordered and a > b:
                continue
            for ta in by_size[a]:
                for tb in by_size[b]:
                    if not ordered and a == b and ta > tb:
                        continue
                    out.append((ta, tb))
        by_size[n] = out
    return [t for n in range(1, max_nodes + 1) for t in by_size[n]]


def shape_to_children(shape: tuple, labels=None) -> tuple:
    """Label a nested-tuple shape with naturals.  Returns ``(children, root)``."""
    counter = iter(labels) if labels is not None else iter(range(10**9))
    children: dict = {}

    def walk(t):
        v = next(counter)
        children[v] = [walk(c) for c in t]
        return v

    root = walk(shape)
    return children, root
