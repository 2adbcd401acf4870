"""Stagewise construction of isomorphisms between trees and whole structures.

Stage 0 pairs the two roots.  Stage ``s+1`` extends the map from every
element ``x`` on level ``s`` to its preimages, using the branching oracle of
the source structure to know how many to look for and the branch
isomorphism oracle to decide how to pair two branches:

* one preimage: pair the unique preimages;
* two isomorphic branches: smaller with smaller, larger with larger;
* two non-isomorphic branches: reveal levels until the two source branches
  differ, then pair each source branch with the target branch that agrees
  with it at that level.

The target structure needs no oracles; its preimages are found by bounded
search, stopping at the source's branching value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    Element,
    StructureHandle,
    detect_cycle,
    extree_slice,
    tree_slice,
)
from .errors import (
    CyclicRoot,
    IncompleteMatching,
    MissingOracle,
    NotCyclic,
    OracleMismatch,
    SeparationFailure,
    TwoOneError,
)
from .treeiso import canonical_code, separating_level


@dataclass(frozen=True)
class IsoConfig:
    stage_budget: int = 6
    separating_level_cap: int = 8
    search_bound: int = 10_000
    match_depth: int = 3
    max_retries: int = 3
    cycle_bound: Optional[int] = None

    def __post_init__(self):
        for name in ("stage_budget", "separating_level_cap", "search_bound", "match_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass
class PartialIso:
    pairs: dict = field(default_factory=dict)
    stage_fixed: dict = field(default_factory=dict)
    stages_run: int = 0
    complete: bool = False
    log: list = field(default_factory=list)
    _image: set = field(default_factory=set, repr=False)

    def fix(self, x: Element, y: Element, stage: int) -> None:
        if x in self.pairs:
            if self.pairs[x] != y:
                raise TwoOneError(f"pair for {x} already fixed to {self.pairs[x]}, not {y}")
            return
        self.pairs[x] = y
        self._image.add(y)
        self.stage_fixed[x] = stage
        self.log.append((stage, x, y))

    def maps_onto(self, y: Element) -> bool:
        return y in self._image

    def merge(self, other: "PartialIso") -> None:
        for stage, x, y in other.log:
            self.fix(x, y, stage)
        self.stages_run = max(self.stages_run, other.stages_run)

    def to_json_rows(self) -> list:
        return [[x, y, s] for s, x, y in sorted(self.log)]

    def to_dict(self) -> dict:
        return {
            "pairs": self.to_json_rows(),
            "stages_run": self.stages_run,
            "complete": self.complete,
        }

    @classmethod
    def from_dict(cls, data) -> "PartialIso":
        rows = data["pairs"] if isinstance(data, dict) else data
        h = cls()
        for x, y, s in rows:
            h.fix(int(x), int(y), int(s))
        if isinstance(data, dict):
            h.stages_run = int(data.get("stages_run", max(h.stage_fixed.values(), default=0)))
            h.complete = bool(data.get("complete", False))
        else:
            h.stages_run = max(h.stage_fixed.values(), default=0)
        return h

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _require_source_oracles(A: StructureHandle) -> None:
    if not (A.has_beta and A.has_iso):
        raise MissingOracle(f"{A.label or 'source'} needs branching and branch isomorphism oracles")


def _target_preimages(B: StructureHandle, y: Element, count: int, bound: int):
    """Preimages of ``y`` in the target, checked against the expected count.

    Returns ``None`` when fewer than ``count`` were found and nothing rules
    out a larger bound finding the rest.
    """
    found = B.preimages(y, bound).found
    if B.has_beta and B.beta(y) != count:
        raise OracleMismatch(f"beta differs: {count} in source, {B.beta(y)} in target at {y}")
    if len(found) > count:
        raise OracleMismatch(f"target element {y} has {len(found)} preimages, source expects {count}")
    if len(found) < count:
        return None
    return found


def _pair_split(A, B, x, xs, ys, cfg: IsoConfig):
    """Pair the branches of a split element whose branches are not isomorphic."""
    x1, x2 = xs
    y1, y2 = ys
    bound = cfg.search_bound
    n = separating_level(A, x1, x2, cfg.separating_level_cap, bound)
    if n is None:
        raise SeparationFailure(
            f"branches {x1}, {x2} of {x} agree up to level {cfg.separating_level_cap}"
        )
    while n <= cfg.separating_level_cap:
        a1 = canonical_code(tree_slice(A, x1, n, bound))
        a2 = canonical_code(tree_slice(A, x2, n, bound))
        b1 = canonical_code(tree_slice(B, y1, n, bound))
        b2 = canonical_code(tree_slice(B, y2, n, bound))
        straight = a1 == b1 and a2 == b2
        crossed = a1 == b2 and a2 == b1
        if straight and not crossed:
            return {x1: y1, x2: y2}
        if crossed and not straight:
            return {x1: y2, x2: y1}
        if not straight and not crossed:
            raise OracleMismatch(
                f"branches of {x} and of its image have different shapes at level {n}"
            )
        n += 1
    raise SeparationFailure(
        f"target branches {y1}, {y2} stay ambiguous up to level {cfg.separating_level_cap}"
    )


def _grow(A, B, h: PartialIso, frontier: list, start_stage: int, cfg: IsoConfig) -> PartialIso:
    bound = cfg.search_bound
    stage = start_stage
    while stage < cfg.stage_budget:
        nxt = []
        for x in sorted(frontier):
            y = h.pairs[x]
            count = A.beta(x)
            xs = A.preimages(x, bound).found
            if len(xs) < count:
                h.stages_run = stage
                h.complete = False
                return h
            ys = _target_preimages(B, y, count, bound)
            if ys is None:
                h.stages_run = stage
                h.complete = False
                return h
            if count == 1:
                chosen = {xs[0]: ys[0]}
            elif A.iso(x) == 1:
                chosen = {min(xs): min(ys), max(xs): max(ys)}
            else:
                chosen = _pair_split(A, B, x, xs, ys, cfg)
            for a, b in sorted(chosen.items()):
                if h.maps_onto(b):
                    raise OracleMismatch(f"{b} is already the image of another element")
                h.fix(a, b, stage + 1)
                nxt.append(a)
        frontier = nxt
        stage += 1
    h.stages_run = stage
    h.complete = True
    return h


def build_tree_iso(A: StructureHandle, a0: Element, B: StructureHandle, b0: Element, cfg: IsoConfig) -> PartialIso:
    """Isomorphism between the trees of non-cyclic ``a0`` and ``b0``, up to ``cfg.stage_budget`` levels."""
    _require_source_oracles(A)
    for S, r in ((A, a0), (B, b0)):
        info = detect_cycle(S, r, cfg.search_bound)
        if info.found and r in info.cyclic_elements:
            raise CyclicRoot(f"{r} is cyclic in {S.label or 'structure'}")
    h = PartialIso()
    h.fix(a0, b0, 0)
    return _grow(A, B, h, [a0], 0, cfg)


def build_extree_iso(
    A: StructureHandle, c1: Element, K: int, B: StructureHandle, d1: Element, cfg: IsoConfig
) -> PartialIso:
    """Isomorphism between the exclusive trees of cyclic ``c1`` and ``d1``."""
    _require_source_oracles(A)
    if A.iterate(c1, K) != c1:
        raise NotCyclic(f"f^{K}({c1}) != {c1} in {A.label}")
    if B.iterate(d1, K) != d1:
        raise NotCyclic(f"g^{K}({d1}) != {d1} in {B.label}")
    h = PartialIso()
    h.fix(c1, d1, 0)
    bound = cfg.search_bound
    a_pred = A.iterate(c1, K - 1)
    b_pred = B.iterate(d1, K - 1)
    a_side = A.beta(c1) == 2
    xs = [x for x in A.preimages(c1, bound).found if x != a_pred]
    if B.has_beta:
        b_side = B.beta(d1) == 2
    else:
        b_side = bool([y for y in B.preimages(d1, bound).found if y != b_pred])
    ys = [y for y in B.preimages(d1, bound).found if y != b_pred]
    if a_side != b_side:
        raise OracleMismatch(f"exactly one of {c1}, {d1} has a non-cyclic preimage")
    if not a_side:
        h.stages_run = cfg.stage_budget
        h.complete = True
        return h
    if not xs or not ys:
        h.stages_run = 0
        return h
    if len(ys) > 1:
        raise OracleMismatch(f"{d1} has more than one non-cyclic preimage")
    h.fix(xs[0], ys[0], 1)
    return _grow(A, B, h, [xs[0]], 1, cfg)


def find_cycles(S: StructureHandle, k: int, element_bound: int) -> list:
    """All cycles of length exactly ``k`` whose least element is ``<= element_bound``.

    Each cycle is returned starting from its least element.
    """
    out = []
    for x in range(element_bound + 1):
        if not S.contains(x) or S.iterate(x, k) != x:
            continue
        cycle = [x]
        for _ in range(k - 1):
            cycle.append(S.apply(cycle[-1]))
        if len(set(cycle)) != k or min(cycle) != x:
            continue
        out.append(tuple(cycle))
    return out


def cycle_signature(S: StructureHandle, cycle: tuple, depth: int, bound: int) -> tuple:
    k = len(cycle)
    return tuple(canonical_code(extree_slice(S, c, k, depth, bound)) for c in cycle)


@dataclass
class CycleMatching:
    pairs: list
    unmatched_a: list
    unmatched_b: list

    @property
    def complete(self) -> bool:
        return not self.unmatched_a and not self.unmatched_b

    def to_dict(self) -> dict:
        return {
            "pairs": [[list(c), list(d)] for c, d in self.pairs],
            "unmatched_a": [list(c) for c in self.unmatched_a],
            "unmatched_b": [list(c) for c in self.unmatched_b],
        }


def match_cycles(
    A: StructureHandle,
    B: StructureHandle,
    k: int,
    element_bound: int,
    depth: int,
    bound: int = 10_000,
) -> CycleMatching:
    """Pair k-cycles whose exclusive-tree codes agree up to rotation.

    Each pair is ``(cycle_a, cycle_b)`` with ``cycle_b`` rotated so that its
    r-th element corresponds to the r-th element of ``cycle_a``.  Pairing is
    greedy in order of least element, taking the first free match and the
    smallest matching rotation.
    """
    ca = find_cycles(A, k, element_bound)
    cb = find_cycles(B, k, element_bound)
    sig_b = [cycle_signature(B, d, depth, bound) for d in cb]
    used = set()
    pairs, left_a = [], []
    for c in ca:
        sig = cycle_signature(A, c, depth, bound)
        hit = None
        for j, d in enumerate(cb):
            if j in used:
                continue
            for r in range(k):
                if sig_b[j][r:] + sig_b[j][:r] == sig:
                    hit = (j, d[r:] + d[:r])
                    break
            if hit:
                break
        if hit is None:
            left_a.append(c)
        else:
            used.add(hit[0])
            pairs.append((c, hit[1]))
    left_b = [d for j, d in enumerate(cb) if j not in used]
    return CycleMatching(pairs, left_a, left_b)


def build_structure_iso(A: StructureHandle, B: StructureHandle, ks, cfg: IsoConfig) -> PartialIso:
    """Union of exclusive-tree isomorphisms over matched cycles of each length in ``ks``.

    A wrong match made at too shallow a depth shows up as ``OracleMismatch``
    while building; the matching depth is then doubled and everything for
    that length rebuilt, up to ``cfg.max_retries`` times.
    """
    _require_source_oracles(A)
    element_bound = cfg.cycle_bound if cfg.cycle_bound is not None else cfg.search_bound
    total = PartialIso()
    complete = True
    for k in ks:
        depth = cfg.match_depth
        for attempt in range(cfg.max_retries + 1):
            matching = match_cycles(A, B, k, element_bound, depth, cfg.search_bound)
            if not matching.complete:
                raise IncompleteMatching(
                    f"{len(matching.unmatched_a)} cycle(s) of length {k} in A and "
                    f"{len(matching.unmatched_b)} in B have no partner",
                    matching.unmatched_a,
                    matching.unmatched_b,
                )
            try:
                part = PartialIso()
                part_complete = True
                for cyc_a, cyc_b in matching.pairs:
                    for c, d in zip(cyc_a, cyc_b):
                        piece = build_extree_iso(A, c, k, B, d, cfg)
                        part.merge(piece)
                        part_complete = part_complete and piece.complete
            except OracleMismatch:
                if attempt == cfg.max_retries:
                    raise
                depth *= 2
                continue
            total.merge(part)
            complete = complete and part_complete
            break
    total.complete = complete
    total.stages_run = cfg.stage_budget if complete else total.stages_run
    return total


@dataclass
class VerifyReport:
    injectivity: list = field(default_factory=list)
    commutation: list = field(default_factory=list)
    beta_agreement: list = field(default_factory=list)
    level: list = field(default_factory=list)
    rewrites: list = field(default_factory=list)
    checked_pairs: int = 0

    @property
    def ok(self) -> bool:
        return not (self.injectivity or self.commutation or self.beta_agreement or self.level or self.rewrites)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checked_pairs": self.checked_pairs,
            "injectivity": self.injectivity,
            "commutation": self.commutation,
            "beta_agreement": self.beta_agreement,
            "level": self.level,
            "rewrites": self.rewrites,
        }


def _count_beta(S: StructureHandle, x: Element, bound: int) -> int:
    if S.has_beta:
        return S.beta(x)
    return len(S.preimages(x, bound).found)


def verify_partial_iso(
    A: StructureHandle, B: StructureHandle, h: PartialIso, bound: Optional[int] = None
) -> VerifyReport:
    """Check injectivity, commutation, branching agreement and level preservation.

    Branching is only compared on interior points, those fixed before the
    last stage, since frontier points have not had their preimages paired.
    Without oracles branching is counted by a scan up to ``bound`` (default:
    the largest element seen in ``h``).
    """
    report = VerifyReport(checked_pairs=len(h.pairs))
    if not h.pairs:
        return report
    if bound is None:
        bound = max(max(h.pairs), max(h.pairs.values()))

    seen: dict = {}
    for x, y in sorted(h.pairs.items()):
        if y in seen:
            report.injectivity.append([seen[y], x, y])
        else:
            seen[y] = x

    logged: dict = {}
    for stage, x, y in h.log:
        if x in logged and logged[x] != (stage, y):
            report.rewrites.append([x, logged[x][1], y])
        logged.setdefault(x, (stage, y))

    for x, y in sorted(h.pairs.items()):
        fx = A.apply(x)
        if fx in h.pairs:
            if B.apply(y) != h.pairs[fx]:
                report.commutation.append([x, y, fx, B.apply(y), h.pairs[fx]])
            sx, sf = h.stage_fixed.get(x, 0), h.stage_fixed.get(fx, 0)
            if sx > 0 and sx != sf + 1:
                report.level.append([x, sx, fx, sf])
        if h.stage_fixed.get(x, 0) < h.stages_run:
            ba, bb = _count_beta(A, x, bound), _count_beta(B, y, bound)
            if ba != bb:
                report.beta_agreement.append([x, ba, y, bb])
    return report
