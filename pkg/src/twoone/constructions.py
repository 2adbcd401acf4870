"""Stage constructions over a toy registry of partial computable functions.

A registry entry stands in for a partial computable function: finitely many
inputs with a value and the number of steps needed to produce it, plus a
default for every other input (divergent, or a fixed value and step count).
``simulate(R, e, x, s)`` is the value when the computation halts within
``s`` steps and ``None`` while it is still running.

Every construction allocates "unused" numbers least-first (of the required
parity where one is specified), defines ``f`` on each element exactly once,
and records a per-stage trace.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import Element, OracleSet, Origin, StructureHandle
from .errors import ElementBudgetExceeded, SpecError, TwoOneError, UnknownIndex
from .families import finite_map

DEFAULT_MAX_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class StepFunction:
    """A partial function with step counts.

    ``entries`` maps an input to ``(value, steps)``.  ``default`` is either
    ``None`` (diverge everywhere else) or a ``(value, steps)`` pair.
    """

    index: int
    entries: dict = field(default_factory=dict)
    default: Optional[tuple] = None

    def run(self, x: Element, s: int) -> Optional[int]:
        hit = self.entries.get(x, self.default)
        if hit is None:
            return None
        value, steps = hit
        return value if steps <= s else None

    def halting_inputs(self, s: int, value: Optional[int] = None) -> list:
        """Listed inputs that halt within ``s`` steps (the default is not expanded)."""
        return sorted(
            x
            for x, (v, steps) in self.entries.items()
            if steps <= s and (value is None or v == value)
        )

    def default_halts(self, s: int, value: Optional[int] = None) -> bool:
        if self.default is None:
            return False
        v, steps = self.default
        return steps <= s and (value is None or v == value)

    def to_dict(self) -> dict:
        return {
            "e": self.index,
            "entries": [
                {"x": x, "value": v, "steps": st} for x, (v, st) in sorted(self.entries.items())
            ],
            "default": "divergent"
            if self.default is None
            else {"value": self.default[0], "steps": self.default[1]},
        }


class Registry:
    def __init__(self, functions: Iterable[StepFunction] = ()):
        self.functions = list(functions)
        for i, fn in enumerate(self.functions):
            if fn.index != i:
                raise SpecError(f"registry indices must be dense: position {i} holds index {fn.index}")

    def __len__(self):
        return len(self.functions)

    def __getitem__(self, e: int) -> StepFunction:
        if not 0 <= e < len(self.functions):
            raise UnknownIndex(f"no function with index {e} (registry has {len(self.functions)})")
        return self.functions[e]

    @classmethod
    def from_json(cls, data) -> "Registry":
        if not isinstance(data, list):
            raise SpecError("registry must be a JSON list")
        fns = []
        for item in sorted(data, key=lambda d: d.get("e", -1) if isinstance(d, dict) else -1):
            if not isinstance(item, dict) or "e" not in item:
                raise SpecError(f"bad registry entry {item!r}")
            entries = {}
            for ent in item.get("entries", []):
                try:
                    x, v, st = int(ent["x"]), int(ent["value"]), int(ent["steps"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise SpecError(f"bad entry {ent!r} in function {item['e']}") from exc
                if x < 0 or st < 0:
                    raise SpecError(f"negative input or step count in {ent!r}")
                entries[x] = (v, st)
            default = item.get("default", "divergent")
            if default == "divergent":
                default = None
            elif isinstance(default, dict):
                default = (int(default["value"]), int(default["steps"]))
            else:
                raise SpecError(f"bad default {default!r}")
            fns.append(StepFunction(int(item["e"]), entries, default))
        return cls(fns)

    def to_json(self) -> list:
        return [fn.to_dict() for fn in self.functions]


def simulate(R: Registry, e: int, x: Element, s: int) -> Optional[int]:
    return R[e].run(x, s)


@dataclass
class StageRecord:
    stage: int
    action: str
    elements_added: list
    requirement_events: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "action": self.action,
            "elements_added": self.elements_added,
            "requirement_events": self.requirement_events,
        }


@dataclass
class StageTrace:
    per_stage: list = field(default_factory=list)
    table: dict = field(default_factory=dict)
    levels: list = field(default_factory=list)

    def events(self) -> list:
        return [ev for r in self.per_stage for ev in r.requirement_events]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in self.per_stage)

    def assigned_once(self) -> bool:
        added = [x for r in self.per_stage for x in r.elements_added]
        return len(added) == len(set(added)) and set(added) == set(self.table)


class _Builder:
    """Shared bookkeeping: the table, levels below a root, and the trace."""

    def __init__(self, max_elements: int):
        self.f: dict = {}
        self.children: dict = {}
        self.level: dict = {}
        self.levels: list = []
        self.max_elements = max_elements
        self.trace = StageTrace(table=self.f, levels=self.levels)
        self._added: list = []

    def define(self, x: Element, y: Element, level: Optional[int] = None) -> None:
        if x in self.f:
            raise TwoOneError(f"f({x}) is already defined")
        self.f[x] = y
        if x != y:
            self.children.setdefault(y, []).append(x)
        if level is not None:
            self.level[x] = level
            while len(self.levels) <= level:
                self.levels.append([])
            self.levels[level].append(x)
        self._added.append(x)

    def reserve(self, extra: int) -> None:
        if len(self.f) + extra > self.max_elements:
            raise ElementBudgetExceeded(
                f"next stage needs {len(self.f) + extra} elements, budget is {self.max_elements}"
            )

    def close_stage(self, stage: int, action: str, events=()) -> None:
        self.trace.per_stage.append(StageRecord(stage, action, self._added, list(events)))
        self._added = []

    def preimage_count(self, x: Element) -> int:
        return len(self.children.get(x, ())) + (1 if self.f.get(x) == x else 0)


def construct_prop31(chi: StepFunction, stages: int, max_elements: int = DEFAULT_MAX_ELEMENTS):
    """A single 1-cycle at 0 whose split elements are exactly those enumerated by ``chi``.

    ``chi`` is a partial characteristic function: it halts with 1 on members
    and never halts otherwise.  Stage ``s+1`` picks the least element ``a``
    that currently has at most one preimage and for which ``chi`` halts
    within ``s`` steps, gives it a fresh preimage ``x0`` with a chain reaching
    level ``s``, then extends every element of level ``s`` by one new
    preimage.
    """
    b = _Builder(max_elements)
    b.define(0, 0, 0)
    b.close_stage(0, "init")
    if stages >= 1:
        b.define(1, 0, 1)
        b.close_stage(1, "init")
    nxt = 2
    for s in range(1, stages):
        candidates = [
            a for a in chi.halting_inputs(s, value=1) if a in b.f and b.preimage_count(a) <= 1
        ]
        if chi.default_halts(s, value=1):
            # every element qualifies; the least hair is the least with <= 1 preimage
            least = next((a for a in sorted(b.f) if b.preimage_count(a) <= 1), None)
            if least is not None:
                candidates.append(least)
        events = []
        width = len(b.levels[s])
        if candidates:
            a = min(candidates)
            l = b.level[a] + 1
            chain = max(s - l, 0)
            b.reserve(1 + chain + width + 1)
            x0 = nxt
            nxt += 1
            b.define(x0, a, l)
            prev = x0
            for i in range(1, chain + 1):
                b.define(nxt, prev, l + i)
                prev = nxt
                nxt += 1
            events.append({"a": a, "x0": x0, "level": l, "chain": chain})
        else:
            b.reserve(width)
        for x in sorted(b.levels[s]):
            b.define(nxt, x, s + 1)
            nxt += 1
        b.close_stage(s + 1, "split" if events else "extend", events)

    return finite_map(dict(b.f), label=f"prop31[{stages}]"), b.trace


@dataclass
class Prop32State:
    M: int
    assignments: dict = field(default_factory=dict)
    attended: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "assignments": {str(e): lv for e, lv in sorted(self.assignments.items())},
            "attended": list(self.attended),
        }


def _parity_beta(x: Element) -> int:
    return 2 if x % 2 == 0 else 1


def construct_prop32(R: Registry, stages: int, max_elements: int = DEFAULT_MAX_ELEMENTS):
    """A single 1-cycle at 0 with evens split, odds not, built against ``R``.

    Requirement ``P_e`` watches the level ``L_e`` that ``phi_e`` was assigned
    to.  When ``phi_i`` halts with 1 on some ``x`` of that level (least ``i``
    first, each requirement at most once), the construction makes the two
    branches of every element of level ``L_i`` non-isomorphic by growing one
    side with odd numbers and the other with even numbers.  Without
    attention, every frontier element gets two new even preimages.

    The width doubles on every stage, so the element budget bounds the
    number of stages that can actually be run.
    """
    b = _Builder(max_elements)
    odd, even = 1, 4
    b.define(0, 0, 0)
    b.define(2, 0, 1)
    b.close_stage(0, "init")
    state = Prop32State(M=1)
    attended = set()

    def take_odd():
        nonlocal odd
        v = odd
        odd += 2
        return v

    def take_even():
        nonlocal even
        v = even
        even += 2
        return v

    def descendants(x, depth):
        layer = [x]
        for _ in range(depth):
            layer = [c for y in layer for c in sorted(b.children.get(y, ()))]
        return layer

    for s in range(stages):
        M = state.M
        e = len(state.assignments)
        if e < len(R):
            state.assignments[e] = M
        chosen = None
        for i in sorted(state.assignments):
            if i in attended:
                continue
            fn = R[i]
            L = state.assignments[i]
            members = b.levels[L]
            member_set = set(members)
            hits = [x for x in fn.halting_inputs(s, value=1) if x in member_set]
            if fn.default_halts(s, value=1):
                hits.append(min(members))
            if hits:
                chosen = (i, min(hits), L)
                break

        frontier = sorted(b.levels[M])
        if chosen is None:
            b.reserve(2 * len(frontier))
            for x in frontier:
                b.define(take_even(), x, M + 1)
                if x % 2 == 0:
                    b.define(take_even(), x, M + 1)
            state.M = M + 1
            b.close_stage(s + 1, "extend")
            continue

        i, x, L = chosen
        b.reserve(6 * len(frontier))
        if L < M:
            case = "below-frontier"
            for xp in sorted(b.levels[L]):
                x1, x2 = sorted(b.children[xp])
                for y in sorted(descendants(x1, M - L - 1)):
                    b.define(take_odd(), y, M + 1)
                    b.define(take_odd(), y, M + 1)
                for y in sorted(descendants(x2, M - L - 1)):
                    b.define(take_even(), y, M + 1)
                    b.define(take_even(), y, M + 1)
        else:
            case = "at-frontier"
            for xp in frontier:
                b.define(take_odd(), xp, M + 1)
                b.define(take_even(), xp, M + 1)
        new_level = sorted(b.levels[M + 1])
        for y in (v for v in new_level if v % 2 == 1):
            b.define(take_even(), y, M + 2)
        for y in (v for v in new_level if v % 2 == 0):
            b.define(take_even(), y, M + 2)
            b.define(take_even(), y, M + 2)
        state.M = M + 2
        attended.add(i)
        state.attended.append(i)
        b.close_stage(
            s + 1, "attention", [{"requirement": i, "x": x, "level": L, "case": case}]
        )

    handle = finite_map(
        dict(b.f),
        label=f"prop32[{stages}]",
        oracles=OracleSet(beta=_parity_beta, origin=Origin.CONSTRUCTION_TRACE),
    )
    return handle, b.trace, state


def prop33a_f(x: Element) -> Element:
    if x == 0 or x % 2 == 1:
        return x
    if x % 4 == 2:
        return x - 1
    return x // 2


def structure_prop33A() -> StructureHandle:
    """Infinitely many 1-cycles: odds and 0, a chain below each ``x ≡ 1 (mod 4)``."""
    return StructureHandle(
        prop33a_f,
        oracles=OracleSet(
            beta=lambda x: 2 if x % 4 == 1 else 1,
            iso=lambda x: 0,
            origin=Origin.CLOSED_FORM,
        ),
        label="prop33a",
    )


def construct_prop33B(R: Registry, stages: int, max_elements: int = DEFAULT_MAX_ELEMENTS):
    """1-cycles at the evens; ``2e`` gains a chain of odds once ``phi_e(e)`` halts.

    At most one ``e`` is served per stage (the least eligible).  Its chain
    has height ``s`` when attached at stage ``s+1``; then every chain grows
    by one odd number and the 1-cycle ``2(s+1)`` is added.
    """
    b = _Builder(max_elements)
    odd = 1
    b.define(0, 0)
    b.close_stage(0, "init")
    tips: dict = {}
    for s in range(stages):
        chosen = None
        for e in range(s + 1):
            if e >= len(R):
                break
            c = 2 * e
            if c in b.f and b.f[c] == c and c not in tips and R[e].run(e, s) is not None:
                chosen = e
                break
        b.reserve(len(tips) + s + 2)
        events = []
        if chosen is not None:
            c = 2 * chosen
            prev = c
            for _ in range(s):
                b.define(odd, prev)
                prev = odd
                odd += 2
            tips[c] = prev
            events.append({"e": chosen, "cycle": c, "height": s})
        for c in sorted(tips):
            b.define(odd, tips[c])
            tips[c] = odd
            odd += 2
        b.define(2 * (s + 1), 2 * (s + 1))
        b.close_stage(s + 1, "attach" if events else "extend", events)

    return finite_map(dict(b.f), label=f"prop33b[{stages}]"), b.trace
