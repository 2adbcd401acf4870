import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoone.constructions import structure_prop33A
from twoone.core import extree_slice, tree_slice
from twoone.errors import DepthMismatch, NotATree, TooLarge
from twoone.families import ShapeStructure
from twoone.treeiso import (
    brute_force_isomorphic,
    canonical_code,
    enumerate_shapes,
    is_isomorphic,
    separating_level,
    shape_to_children,
    tree_from_children,
)


def slice_of(shape, depth=None, labels=None):
    children, root = shape_to_children(shape, labels)
    return tree_from_children(children, root, depth)


def height(shape):
    return 0 if not shape else 1 + max(height(c) for c in shape)


# x1 heads a bare chain; x2 has one child which roots a full binary tree
CHAIN_VS_FULL = ShapeStructure(
    {"R": ["C", "G"], "C": ["C"], "G": ["F"], "F": ["F", "F"]}, [["R"]], "chain-vs-full"
)


class TestCodes:
    def test_single_node_constant(self):
        assert canonical_code(slice_of(())) == (1, 0)
        assert canonical_code(slice_of((), labels=[99])) == (1, 0)

    def test_relabelled_chain(self):
        chain = (((),),)
        assert canonical_code(slice_of(chain)) == canonical_code(slice_of(chain, labels=[7, 3, 11]))

    def test_chain_vs_cherry(self):
        a = slice_of(((),), depth=1)
        b = slice_of(((), ()), depth=1)
        assert canonical_code(a) != canonical_code(b)
        assert not brute_force_isomorphic(a, b)

    def test_cyclic_root_rejected(self):
        T = tree_slice(structure_prop33A(), 1, 2, 100)
        with pytest.raises(NotATree):
            canonical_code(T)
        with pytest.raises(NotATree):
            brute_force_isomorphic(T, T)


class TestIsIsomorphic:
    def test_degenerate_chains(self):
        A = structure_prop33A()
        assert is_isomorphic(extree_slice(A, 1, 1, 2, 100), extree_slice(A, 5, 1, 2, 100))
        assert is_isomorphic(extree_slice(A, 1, 1, 2, 100), slice_of((((),),)))

    def test_one_child_vs_none(self):
        A = structure_prop33A()
        assert not is_isomorphic(extree_slice(A, 1, 1, 1, 100), extree_slice(A, 3, 1, 1, 100))

    def test_reflexive(self):
        T = tree_slice(structure_prop33A(), 10, 3, 100)
        assert is_isomorphic(T, T)

    def test_depth_mismatch(self):
        with pytest.raises(DepthMismatch):
            is_isomorphic(slice_of(()), slice_of(((),)))


class TestBruteForce:
    def test_leaf_vs_one_child(self):
        assert not brute_force_isomorphic(slice_of((), depth=1), slice_of(((),)))

    def test_mirror(self):
        left = ((((),),), ())
        right = ((), (((),),))
        assert brute_force_isomorphic(slice_of(left), slice_of(right))

    def test_too_large(self):
        big = slice_of(((((), ()), ((), ())), (((), ()), ((), ()))))
        with pytest.raises(TooLarge):
            brute_force_isomorphic(big, big)

    def test_small_exhaustive(self):
        shapes = enumerate_shapes(4, ordered=True)
        for s in shapes:
            for t in shapes:
                a, b = slice_of(s, 3), slice_of(t, 3)
                assert brute_force_isomorphic(a, b) == is_isomorphic(a, b)


class TestEnumeration:
    def test_counts(self):
        # unordered rooted trees with arity <= 2 (Wedderburn-type counts by size)
        sizes = [0] * 8
        for s in enumerate_shapes(7):
            sizes[sum(1 for _ in _walk(s))] += 1
        assert sizes[1:] == [1, 1, 2, 3, 6, 11, 23]

    def test_ordered_counts(self):
        # Motzkin numbers
        sizes = [0] * 8
        for s in enumerate_shapes(7, ordered=True):
            sizes[sum(1 for _ in _walk(s))] += 1
        assert sizes[1:] == [1, 1, 2, 4, 9, 21, 51]


def _walk(shape):
    yield shape
    for c in shape:
        yield from _walk(c)


def test_oracle_equivalence_seven_nodes():
    shapes = enumerate_shapes(7, ordered=True)
    slices = [slice_of(s, 6) for s in shapes]
    for a in slices:
        for b in slices:
            assert is_isomorphic(a, b) == brute_force_isomorphic(a, b)


def test_code_stability_under_relabelling():
    rng = random.Random(20261016)
    corpus = [s for s in enumerate_shapes(9) if len(list(_walk(s))) >= 6][:12]
    for shape in corpus:
        n = len(list(_walk(shape)))
        ref = canonical_code(slice_of(shape, 8))
        for _ in range(1000):
            labels = rng.sample(range(10**6), n)
            assert canonical_code(slice_of(_shuffle(shape, rng), 8, labels)) == ref


def _shuffle(shape, rng):
    kids = [_shuffle(c, rng) for c in shape]
    rng.shuffle(kids)
    return tuple(kids)


class TestSeparatingLevel:
    def test_cyclic_vs_chain(self):
        assert separating_level(structure_prop33A(), 1, 2, 5, 1000) == 1

    def test_isomorphic_chains_not_found(self):
        A = structure_prop33A()
        assert separating_level(A, 2, 6, 4, 10_000) is None

    def test_chain_vs_full(self):
        S = CHAIN_VS_FULL
        x1, x2 = sorted(S.preimages(1, 1000).found)
        assert S.kind_of(x1) == "C" and S.kind_of(x2) == "G"
        assert separating_level(S, x1, x2, 3, 1000) == 2
        # the brute-force oracle agrees level by level
        for n, expect in ((0, True), (1, True), (2, False)):
            a, b = tree_slice(S, x1, n, 1000), tree_slice(S, x2, n, 1000)
            assert brute_force_isomorphic(a, b) is expect

    def test_same_element(self):
        with pytest.raises(ValueError):
            separating_level(structure_prop33A(), 2, 2, 3, 100)

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_minimal(self, data):
        kinds = ["a", "b", "c", "d"]
        rules = {
            k: data.draw(st.lists(st.sampled_from(kinds), min_size=1, max_size=2), label=k)
            for k in kinds
        }
        S = ShapeStructure(rules, [["a", "b"]], "random")
        x1 = data.draw(st.integers(2, 30))
        x2 = data.draw(st.integers(2, 30).filter(lambda v: v != x1))
        cap = 4
        bound = 5000
        n = separating_level(S, x1, x2, cap, bound)
        deep1, deep2 = tree_slice(S, x1, cap, bound), tree_slice(S, x2, cap, bound)
        scan = None
        for m in range(cap + 1):
            if not is_isomorphic(deep1.truncate(m), deep2.truncate(m)):
                scan = m
                break
        assert n == scan
