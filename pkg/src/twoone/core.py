"""Lazy functional graphs on the naturals and bounded views of them.

A structure is a total map ``f`` on (a subset of) the naturals.  Nothing is
ever enumerated up front: values are computed on demand and memoized, and
every backward question (preimages, trees, orbits) is answered by a scan
over ``0..bound`` with an explicit flag saying whether the answer is known
to be complete.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, NamedTuple, Optional

from .errors import (
    MissingOracle,
    NotCyclic,
    OracleViolation,
    OutsideDomain,
    StructureViolation,
)

Element = int


class Origin(str, Enum):
    SUPPLIED = "supplied"
    CLOSED_FORM = "closed-form"
    CONSTRUCTION_TRACE = "construction-trace"


@dataclass(frozen=True)
class OracleSet:
    """Optional evaluators for the branching and branch-isomorphism functions.

    ``beta(x)`` is the preimage count (1 or 2).  ``iso(x)`` is only meaningful
    when ``beta(x) == 2`` and says whether the two branches below ``x`` are
    isomorphic (1) or not (0).
    """

    beta: Optional[Callable[[Element], int]] = None
    iso: Optional[Callable[[Element], int]] = None
    origin: Origin = Origin.SUPPLIED


class Preimages(NamedTuple):
    found: tuple
    complete: bool


class StructureHandle:
    """A functional graph given by a total evaluator.

    ``domain`` restricts which naturals belong to the structure (default:
    all of them).  Backward scans skip elements outside the domain.
    """

    def __init__(
        self,
        f: Callable[[Element], Element],
        *,
        oracles: Optional[OracleSet] = None,
        label: str = "",
        domain: Optional[Callable[[Element], bool]] = None,
    ):
        self._f = f
        self.oracles = oracles or OracleSet()
        self.label = label
        self._domain = domain
        self.memo: dict[Element, Element] = {}
        self.explored_bound = -1
        self._inverse: dict[Element, list[Element]] = {}
        self._scanned = -1
        self._lock = threading.RLock()

    def __repr__(self):
        return f"StructureHandle({self.label!r})"

    def contains(self, x: Element) -> bool:
        if x < 0:
            return False
        return self._domain is None or self._domain(x)

    @property
    def has_beta(self) -> bool:
        return self.oracles.beta is not None

    @property
    def has_iso(self) -> bool:
        return self.oracles.iso is not None

    def apply(self, x: Element) -> Element:
        try:
            return self.memo[x]
        except KeyError:
            pass
        if not isinstance(x, int) or not self.contains(x):
            raise OutsideDomain(f"{x!r} is not in the domain of {self.label or 'structure'}")
        y = self._f(x)
        with self._lock:
            self.memo[x] = y
            if x > self.explored_bound:
                self.explored_bound = x
        return y

    def iterate(self, x: Element, n: int) -> Element:
        for _ in range(n):
            x = self.apply(x)
        return x

    def _scan_to(self, bound: int) -> None:
        if bound <= self._scanned:
            return
        with self._lock:
            for y in range(self._scanned + 1, bound + 1):
                if self.contains(y):
                    self._inverse.setdefault(self.apply(y), []).append(y)
            self._scanned = max(self._scanned, bound)

    def preimages(self, x: Element, bound: int) -> Preimages:
        """All ``y <= bound`` with ``f(y) == x``.

        ``complete`` is only ever true when a branching oracle is present and
        the number found equals its value.
        """
        self._scan_to(bound)
        found = tuple(y for y in self._inverse.get(x, ()) if y <= bound)
        if self.oracles.beta is not None:
            expected = self.beta(x)
            if len(found) > expected:
                raise OracleViolation(
                    f"{x} has preimages {list(found)} but beta({x}) = {expected}"
                )
            return Preimages(found, len(found) == expected)
        if len(found) > 2:
            raise StructureViolation(f"{x} has {len(found)} preimages: {list(found)}")
        return Preimages(found, False)

    def branching(self, x: Element, bound: int) -> Optional[int]:
        """1 or 2 when known, ``None`` when the bounded scan cannot tell."""
        found, _ = self.preimages(x, bound)
        if self.oracles.beta is not None:
            return self.beta(x)
        return 2 if len(found) == 2 else None

    def beta(self, x: Element) -> int:
        if self.oracles.beta is None:
            raise MissingOracle(f"{self.label or 'structure'} has no branching oracle")
        value = self.oracles.beta(x)
        if value not in (1, 2):
            raise OracleViolation(f"beta({x}) = {value!r} is not 1 or 2")
        return value

    def iso(self, x: Element) -> int:
        if self.oracles.iso is None:
            raise MissingOracle(f"{self.label or 'structure'} has no branch isomorphism oracle")
        if self.oracles.beta is not None and self.beta(x) != 2:
            raise OracleViolation(f"iso({x}) queried but beta({x}) != 2")
        value = self.oracles.iso(x)
        if value not in (0, 1):
            raise OracleViolation(f"iso({x}) = {value!r} is not 0 or 1")
        return value


@dataclass(frozen=True)
class CycleInfo:
    found: bool
    step_cap: int
    cycle_length: Optional[int] = None
    cyclic_elements: tuple = ()
    entry_steps: Optional[int] = None

    def to_dict(self) -> dict:
        if not self.found:
            return {"found": False, "verdict": "unresolved", "step_cap": self.step_cap}
        return {
            "found": True,
            "cycle_length": self.cycle_length,
            "cyclic_elements": list(self.cyclic_elements),
            "entry_steps": self.entry_steps,
            "step_cap": self.step_cap,
        }


def detect_cycle(S: StructureHandle, x: Element, step_cap: int) -> CycleInfo:
    """Brent cycle detection on the forward orbit of ``x``.

    Reports a cycle iff ``f^m(x) == f^n(x)`` for some ``m < n <= step_cap``,
    i.e. iff tail length plus cycle length is at most ``step_cap``.  Brent may
    need up to about three times that many evaluations to see such a cycle.
    """
    if step_cap < 1:
        raise ValueError("step_cap must be at least 1")
    limit = 3 * step_cap + 2
    power = lam = 1
    tortoise = x
    hare = S.apply(x)
    evaluations = 1
    while tortoise != hare:
        if evaluations >= limit:
            return CycleInfo(False, step_cap)
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = S.apply(hare)
        evaluations += 1
        lam += 1

    tortoise = hare = x
    for _ in range(lam):
        hare = S.apply(hare)
    mu = 0
    while tortoise != hare:
        tortoise = S.apply(tortoise)
        hare = S.apply(hare)
        mu += 1
    if mu + lam > step_cap:
        return CycleInfo(False, step_cap)

    cycle = [tortoise]
    for _ in range(lam - 1):
        cycle.append(S.apply(cycle[-1]))
    start = cycle.index(min(cycle))
    ordered = tuple(cycle[start:] + cycle[:start])
    return CycleInfo(True, step_cap, lam, ordered, mu)


def is_cyclic(S: StructureHandle, x: Element, step_cap: int) -> Optional[bool]:
    """True/False when decided within ``step_cap`` steps, else ``None``."""
    info = detect_cycle(S, x, step_cap)
    if not info.found:
        return None
    return x in info.cyclic_elements


@dataclass(frozen=True)
class TreeSlice:
    """Levels ``0..depth`` of the (exclusive) tree of ``root``.

    ``levels[m]`` holds the elements found ``m`` steps above the root.  When
    the root lies on a cycle and the slice is not exclusive, the walk
    re-enters the cycle: elements repeat across levels and ``cyclic_root`` is
    set, which means the slice is not a tree.
    """

    root: Element
    depth: int
    levels: tuple
    edges: frozenset
    exclusive: bool = False
    search_bound: int = 0
    cyclic_root: bool = False
    complete: bool = False

    def children(self, x: Element) -> list:
        return sorted(c for c, p in self.edges if p == x)

    def children_map(self) -> dict:
        out: dict = {}
        for c, p in self.edges:
            out.setdefault(p, []).append(c)
        for kids in out.values():
            kids.sort()
        return out

    def nodes(self) -> set:
        return set().union(*self.levels)

    def size(self) -> int:
        return sum(len(level) for level in self.levels)

    def truncate(self, n: int) -> "TreeSlice":
        if n > self.depth:
            raise ValueError(f"cannot truncate depth-{self.depth} slice to {n}")
        levels = self.levels[: n + 1]
        if self.cyclic_root:
            # re-entry makes node-level membership ambiguous; keep edges between consecutive levels
            edges = frozenset(
                (c, p)
                for m in range(n)
                for c, p in self.edges
                if c in levels[m + 1] and p in levels[m]
            )
            seen: set = set()
            repeated = False
            for level in levels:
                if seen & level:
                    repeated = True
                seen |= level
        else:
            keep = set().union(*levels)
            edges = frozenset((c, p) for c, p in self.edges if c in keep)
            repeated = False
        return TreeSlice(
            self.root, n, levels, edges, self.exclusive, self.search_bound, repeated, self.complete
        )

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "depth": self.depth,
            "levels": [sorted(level) for level in self.levels],
            "edges": sorted([c, p] for c, p in self.edges),
            "exclusive": self.exclusive,
            "search_bound": self.search_bound,
            "cyclic_root": self.cyclic_root,
            "complete": self.complete,
        }


def _grow_levels(S, first_levels, depth, bound, edges, complete):
    levels = list(first_levels)
    seen = set().union(*levels)
    repeated = False
    while len(levels) <= depth:
        nxt = set()
        for x in sorted(levels[-1]):
            found, ok = S.preimages(x, bound)
            complete = complete and ok
            for y in found:
                edges.add((y, x))
                nxt.add(y)
        if nxt & seen:
            repeated = True
        seen |= nxt
        levels.append(frozenset(nxt))
    return levels, repeated, complete


def tree_slice(S: StructureHandle, x: Element, depth: int, bound: int) -> TreeSlice:
    edges: set = set()
    levels, repeated, complete = _grow_levels(S, [frozenset({x})], depth, bound, edges, True)
    return TreeSlice(x, depth, tuple(levels), frozenset(edges), False, bound, repeated, complete)


def extree_slice(S: StructureHandle, c: Element, K: int, depth: int, bound: int) -> TreeSlice:
    """Exclusive tree of the cyclic element ``c`` on a cycle of length ``K``.

    Only the cyclic predecessor of ``c`` has to be dropped: every other
    element reached by walking backwards from a non-cyclic node is itself
    non-cyclic.
    """
    if K < 1 or S.iterate(c, K) != c:
        raise NotCyclic(f"f^{K}({c}) != {c}")
    cyclic_pred = S.iterate(c, K - 1)
    edges: set = set()
    levels = [frozenset({c})]
    complete = True
    if depth >= 1:
        found, complete = S.preimages(c, bound)
        first = frozenset(y for y in found if y != cyclic_pred)
        edges.update((y, c) for y in first)
        levels.append(first)
        levels, _, complete = _grow_levels(S, levels, depth, bound, edges, complete)
    return TreeSlice(c, depth, tuple(levels), frozenset(edges), True, bound, False, complete)


def orbit_sample(S: StructureHandle, x: Element, forward_steps: int, back_bound: int) -> set:
    """Finite under-approximation of the orbit of ``x``.

    The forward iterates of ``x`` (``forward_steps`` of them) closed under
    preimages among ``0..back_bound``.
    """
    out = {x}
    y = x
    for _ in range(forward_steps):
        y = S.apply(y)
        out.add(y)
    stack = sorted(out)
    while stack:
        z = stack.pop()
        for w in S.preimages(z, back_bound).found:
            if w not in out:
                out.add(w)
                stack.append(w)
    return out


@dataclass(frozen=True)
class RegionReport:
    region: frozenset
    hairs: frozenset
    split_hairs: frozenset
    unconfirmed: frozenset
    bound: int = 0

    def to_dict(self) -> dict:
        return {
            "region": sorted(self.region),
            "hairs": sorted(self.hairs),
            "split_hairs": sorted(self.split_hairs),
            "unconfirmed": sorted(self.unconfirmed),
            "bound": self.bound,
        }


def region_report(
    S: StructureHandle, n: int, bound: int, elements: Optional[Iterable[Element]] = None
) -> RegionReport:
    """Classify ``0..n`` (or ``elements``) into hairs, split hairs and unconfirmed."""
    region = [x for x in (range(n + 1) if elements is None else elements) if S.contains(x)]
    hairs, split, unknown = set(), set(), set()
    for x in region:
        found, complete = S.preimages(x, bound)
        if complete:
            (hairs if len(found) == 1 else split).add(x)
        elif len(found) == 2:
            split.add(x)
        else:
            unknown.add(x)
    return RegionReport(frozenset(region), frozenset(hairs), frozenset(split), frozenset(unknown), bound)


def check_region(S: StructureHandle, n: int, bound: int) -> dict:
    """Preimage counts over ``0..n`` scanned to ``bound``.

    Counts of 0 are only "unconfirmed" (a preimage may exist past the bound);
    a count of 3 or more raises ``StructureViolation``.
    """
    counts = {}
    for x in range(n + 1):
        if S.contains(x):
            counts[x] = len(S.preimages(x, bound).found)
    return {
        "counts": counts,
        "unconfirmed": sorted(x for x, c in counts.items() if c == 0),
    }
