"""Ready-made structures: ℤ-chains, finite tables, shape-rule structures, relabelings."""

from __future__ import annotations

import random
import threading
from collections import deque
from typing import Optional, Sequence

from .core import Element, OracleSet, Origin, StructureHandle
from .errors import OutsideDomain, SpecError


def _to_int(n: int) -> int:
    # ω -> ℤ : 0, -1, 1, -2, 2, ...
    return n // 2 if n % 2 == 0 else -(n + 1) // 2


def _from_int(z: int) -> int:
    return 2 * z if z >= 0 else -2 * z - 1


def zchain() -> StructureHandle:
    """A bare ℤ-chain: ``n`` steps to the successor of its integer label.

    Every element has exactly one preimage and no forward orbit ever
    repeats.
    """
    return StructureHandle(
        lambda x: _from_int(_to_int(x) + 1),
        oracles=OracleSet(beta=lambda x: 1, origin=Origin.CLOSED_FORM),
        label="zchain",
    )


def table(values: Sequence[int], fallback: str = "none", label: str = "table") -> StructureHandle:
    """``f(i) = values[i]``; past the table either undefined or the identity."""
    values = list(values)
    n = len(values)
    if fallback not in ("none", "identity"):
        raise SpecError(f"unknown fallback {fallback!r}")
    for i, v in enumerate(values):
        if not isinstance(v, int) or v < 0:
            raise SpecError(f"table entry {i} is not a natural: {v!r}")
        if fallback == "none" and v >= n:
            raise SpecError(f"table entry {i} -> {v} leaves the finite domain 0..{n - 1}")

    def f(x):
        return values[x] if x < n else x

    domain = (lambda x: x < n) if fallback == "none" else None
    return StructureHandle(f, label=label, domain=domain)


def finite_map(mapping: dict, label: str, oracles: Optional[OracleSet] = None) -> StructureHandle:
    """Structure whose domain is exactly the keys of ``mapping``."""
    return StructureHandle(
        mapping.__getitem__, oracles=oracles, label=label, domain=mapping.__contains__
    )


def shape_classes(rules: dict) -> dict:
    """Group kinds whose infinite unfoldings are isomorphic as unordered trees.

    Partition refinement on the multiset of child classes; the fixpoint is
    graded bisimilarity, which for finitely branching trees coincides with
    isomorphism of the unfoldings.
    """
    cls = {k: 0 for k in rules}
    while True:
        sigs = {k: tuple(sorted(cls[c] for c in rules[k])) for k in rules}
        keyed = {k: (cls[k], sigs[k]) for k in rules}
        ids = {key: i for i, key in enumerate(sorted(set(keyed.values())))}
        new = {k: ids[keyed[k]] for k in rules}
        if len(set(new.values())) == len(set(cls.values())):
            return new
        cls = new


class ShapeStructure(StructureHandle):
    """Structure generated from finitely many cycles and node-kind rules.

    ``rules`` maps a kind to the ordered kinds of its preimages (one or two).
    ``cycles`` lists cycles as sequences of hanging kinds: entry ``r`` is the
    kind of the non-cyclic preimage of the r-th cyclic element, or ``None``
    for an empty exclusive tree.

    Numbers are handed out least-first: cyclic elements first, then
    breadth-first over all trees, so every natural is eventually used and the
    map stays total.  Growth happens lazily when an unseen number is
    evaluated.  Both oracles are exact.
    """

    def __init__(self, rules: dict, cycles: Sequence[Sequence[Optional[str]]], label: str = "shapes"):
        for kind, kids in rules.items():
            if len(kids) not in (1, 2):
                raise SpecError(f"kind {kind!r} must have one or two preimages, got {len(kids)}")
            for k in kids:
                if k not in rules:
                    raise SpecError(f"kind {kind!r} refers to unknown kind {k!r}")
        if not cycles:
            raise SpecError("at least one cycle is required")
        self.rules = {k: tuple(v) for k, v in rules.items()}
        self.classes = shape_classes(self.rules)
        self._parent: dict = {}
        self._kind: dict = {}
        self._cyclic: set = set()
        self._queue: deque = deque()
        self._next = 0
        self._grow_lock = threading.Lock()
        for hanging in cycles:
            if not hanging:
                raise SpecError("empty cycle")
            start = self._next
            members = list(range(start, start + len(hanging)))
            self._next += len(hanging)
            for i, c in enumerate(members):
                self._parent[c] = members[(i + 1) % len(members)]
                self._kind[c] = None
                self._cyclic.add(c)
            for c, kind in zip(members, hanging):
                if kind is not None:
                    if kind not in self.rules:
                        raise SpecError(f"unknown hanging kind {kind!r}")
                    self._queue.append((c, kind))
        if not self._queue:
            raise SpecError("no trees: a finite structure of cycles only cannot grow")
        self._hanging = {parent for parent, _ in self._queue}
        super().__init__(
            self._eval,
            oracles=OracleSet(beta=self._beta, iso=self._iso, origin=Origin.CLOSED_FORM),
            label=label,
        )

    def _grow_until(self, x: Element) -> None:
        with self._grow_lock:
            while x >= self._next:
                parent, kind = self._queue.popleft()
                node = self._next
                self._next += 1
                self._parent[node] = parent
                self._kind[node] = kind
                for kid in self.rules[kind]:
                    self._queue.append((node, kid))

    def _eval(self, x: Element) -> Element:
        self._grow_until(x)
        return self._parent[x]

    def kind_of(self, x: Element) -> Optional[str]:
        self._grow_until(x)
        return self._kind[x]

    def _beta(self, x: Element) -> int:
        self._grow_until(x)
        if x in self._cyclic:
            return 2 if x in self._hanging else 1
        return len(self.rules[self._kind[x]])

    def _iso(self, x: Element) -> int:
        self._grow_until(x)
        if x in self._cyclic:
            return 0
        a, b = self.rules[self._kind[x]]
        return int(self.classes[a] == self.classes[b])


def conjugate(
    S: StructureHandle,
    forward: dict,
    label: Optional[str] = None,
    keep_oracles: bool = True,
) -> StructureHandle:
    """Relabel ``S`` by a permutation ``pi`` that moves finitely many naturals.

    ``forward`` gives ``pi`` on the moved points; every other natural is
    fixed.  The result is ``pi . f . pi^-1``.
    """
    pi = dict(forward)
    inv = {v: k for k, v in pi.items()}
    if len(inv) != len(pi) or set(pi) != set(inv):
        raise SpecError("relabeling must permute its support")

    def fwd(x):
        return pi.get(x, x)

    def back(y):
        return inv.get(y, y)

    oracles = OracleSet()
    if keep_oracles:
        o = S.oracles
        oracles = OracleSet(
            beta=(lambda y: o.beta(back(y))) if o.beta else None,
            iso=(lambda y: o.iso(back(y))) if o.iso else None,
            origin=o.origin,
        )
    return StructureHandle(
        lambda y: fwd(S.apply(back(y))),
        oracles=oracles,
        label=label or f"conj({S.label})",
        domain=lambda y: S.contains(back(y)),
    )


def random_permutation(n: int, seed: int) -> dict:
    """A uniformly random permutation of ``0..n`` as a dict."""
    rng = random.Random(seed)
    image = list(range(n + 1))
    rng.shuffle(image)
    return dict(enumerate(image))


def shifted(S: StructureHandle, offset: int, keep_oracles: bool = True) -> StructureHandle:
    """Copy of ``S`` living on ``offset, offset+1, ...`` via ``x -> x + offset``."""
    if offset < 0:
        raise SpecError("offset must be non-negative")
    oracles = OracleSet()
    if keep_oracles:
        o = S.oracles
        oracles = OracleSet(
            beta=(lambda y: o.beta(y - offset)) if o.beta else None,
            iso=(lambda y: o.iso(y - offset)) if o.iso else None,
            origin=o.origin,
        )

    def g(y):
        if y < offset:
            raise OutsideDomain(f"{y} is below the offset {offset}")
        return S.apply(y - offset) + offset

    return StructureHandle(
        g,
        oracles=oracles,
        label=f"{S.label}+{offset}",
        domain=lambda y: y >= offset and S.contains(y - offset),
    )
