"""JSON structure and registry files.

A structure file holds a JSON object with a ``kind``:

``closed-form``
    ``{"kind": "closed-form", "name": "prop33a" | "zchain"}``
``table``
    ``{"kind": "table", "values": [f(0), ..., f(n)], "fallback": "none" | "identity"}``
``construction``
    ``{"kind": "construction", "name": "prop31" | "prop32" | "prop33a" | "prop33b",
    "stages": N, "registry": [...] | "registry_file": path, "index": e}``
``shapes``
    ``{"kind": "shapes", "rules": {"F": ["F", "F"], ...}, "cycles": [["F", null], ...]}``

Any structure may add ``"relabel": {"offset": d}`` or
``"relabel": {"seed": s, "n": N}`` (a random permutation of ``0..N``), and
``"oracles": false`` to drop the oracles.
"""

from __future__ import annotations

import json
from pathlib import Path

from .constructions import (
    Registry,
    construct_prop31,
    construct_prop32,
    construct_prop33B,
    structure_prop33A,
)
from .core import OracleSet, StructureHandle
from .errors import SpecError
from .families import ShapeStructure, conjugate, random_permutation, shifted, table, zchain


def load_json(source) -> object:
    """Read JSON from a path, ``-`` (stdin) or an already-open file."""
    import sys

    try:
        if source == "-" or source is None:
            return json.load(sys.stdin)
        if hasattr(source, "read"):
            return json.load(source)
        return json.loads(Path(source).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read JSON from {source}: {exc}") from exc


def load_registry(data, base: Path | None = None) -> Registry:
    if isinstance(data, (str, Path)):
        path = Path(data)
        if base is not None and not path.is_absolute():
            path = base / path
        data = load_json(path)
    return Registry.from_json(data)


def unwrap(data) -> dict:
    """Accept a bare structure object or an envelope carrying one under ``structure``."""
    if isinstance(data, dict) and "kind" not in data and isinstance(data.get("structure"), dict):
        return data["structure"]
    if not isinstance(data, dict):
        raise SpecError("structure spec must be a JSON object")
    return data


def _construction(spec: dict, base):
    name = spec.get("name")
    if name == "prop33a":
        return structure_prop33A(), None
    stages = spec.get("stages")
    if not isinstance(stages, int) or stages < 0:
        raise SpecError(f"construction {name!r} needs a non-negative integer 'stages'")
    if "registry" in spec:
        registry = load_registry(spec["registry"], base)
    elif "registry_file" in spec:
        registry = load_registry(spec["registry_file"], base)
    else:
        registry = Registry()
    if name == "prop31":
        index = int(spec.get("index", 0))
        handle, trace = construct_prop31(registry[index], stages)
        return handle, trace
    if name == "prop32":
        handle, trace, _ = construct_prop32(registry, stages)
        return handle, trace
    if name == "prop33b":
        return construct_prop33B(registry, stages)
    raise SpecError(f"unknown construction {name!r}")


def build_structure(data, base: Path | None = None) -> StructureHandle:
    spec = unwrap(data)
    kind = spec.get("kind")
    if kind == "closed-form":
        name = spec.get("name")
        if name == "prop33a":
            S = structure_prop33A()
        elif name == "zchain":
            S = zchain()
        else:
            raise SpecError(f"unknown closed form {name!r}")
    elif kind == "table":
        values = spec.get("values")
        if not isinstance(values, list) or not values:
            raise SpecError("table spec needs a non-empty 'values' list")
        S = table(values, spec.get("fallback", "none"), spec.get("name", "table"))
    elif kind == "construction":
        S, _ = _construction(spec, base)
    elif kind == "shapes":
        rules = spec.get("rules")
        cycles = spec.get("cycles")
        if not isinstance(rules, dict) or not isinstance(cycles, list):
            raise SpecError("shapes spec needs 'rules' (object) and 'cycles' (list)")
        S = ShapeStructure(rules, cycles, spec.get("name", "shapes"))
    else:
        raise SpecError(f"unknown structure kind {kind!r}")

    keep = spec.get("oracles", True)
    relabel = spec.get("relabel")
    if relabel:
        if "offset" in relabel:
            S = shifted(S, int(relabel["offset"]), keep_oracles=keep)
        elif "seed" in relabel:
            perm = random_permutation(int(relabel.get("n", 200)), int(relabel["seed"]))
            S = conjugate(S, perm, keep_oracles=keep)
        else:
            raise SpecError(f"bad relabel {relabel!r}")
    elif not keep:
        S.oracles = OracleSet()
    if "label" in spec:
        S.label = str(spec["label"])
    return S


def load_structure(source) -> StructureHandle:
    base = None
    if isinstance(source, (str, Path)) and source != "-":
        base = Path(source).parent
    return build_structure(load_json(source), base)
