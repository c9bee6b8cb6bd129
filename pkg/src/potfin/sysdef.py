"""JSON system definitions.

Either a builtin::

    {"name": "nat", "builtin": "nat", "max_stage": 8}

or explicit finite stages over ``{start, ..., max}``::

    {"name": "two",
     "index": {"kind": "nat", "start": 1},
     "stages": {"1": ["x"], "2": ["x", "y"]},
     "emb":  {"1->2": {"x": "x"}},
     "proj": {"2->1": {"x": "x", "y": "x"}},
     "pmap": [[2, "x", 1, "x"], [2, "y", 1, "x"]]}

``emb`` and ``proj`` list adjacent stages only; longer maps are composites.
Within a stage ``|>`` is equality.  When ``pmap`` is omitted it is read
off the projections: ``a' |> a`` iff ``a'`` projects to ``a``.  The
explicit index is capped at the last declared stage.
"""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import InputError, SchemaError
from .gallery import BUILTIN_SYSTEMS, builtin_system
from .index import NatIndex
from .system import FactorSystem, RuleSystem

_STATE = {"type": ["string", "integer"]}
_TABLE = {"type": "object", "additionalProperties": _STATE}

SYSTEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "SystemDefinition",
    "type": "object",
    "oneOf": [
        {
            "required": ["builtin"],
            "properties": {
                "name": {"type": "string"},
                "builtin": {"enum": sorted(BUILTIN_SYSTEMS)},
                "max_stage": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        {
            "required": ["name", "stages"],
            "properties": {
                "name": {"type": "string"},
                "index": {
                    "type": "object",
                    "properties": {"kind": {"const": "nat"}, "start": {"type": "integer", "minimum": 0}},
                    "additionalProperties": False,
                },
                "filter": {
                    "type": "object",
                    "properties": {"kind": {"const": "upset"}},
                    "additionalProperties": False,
                },
                "stages": {
                    "type": "object",
                    "minProperties": 1,
                    "patternProperties": {r"^\d+$": {"type": "array", "items": _STATE, "minItems": 1,
                                                     "uniqueItems": True}},
                    "additionalProperties": False,
                },
                "emb": {"type": "object", "patternProperties": {r"^\d+->\d+$": _TABLE},
                        "additionalProperties": False},
                "proj": {"type": "object", "patternProperties": {r"^\d+->\d+$": _TABLE},
                         "additionalProperties": False},
                "pmap": {"type": "array", "items": {
                    "type": "array", "prefixItems": [{"type": "integer"}, _STATE, {"type": "integer"}, _STATE],
                    "minItems": 4, "maxItems": 4}},
            },
            "additionalProperties": False,
        },
    ],
}


def _json_path(err: jsonschema.ValidationError) -> str:
    path = "$"
    for part in err.absolute_path:
        path += f"[{part}]" if isinstance(part, int) else f".{part}"
    return path


def validate_definition(doc) -> None:
    v = jsonschema.Draft202012Validator(SYSTEM_SCHEMA)
    errors = sorted(v.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        # oneOf hides the useful message; report the branch that matches the keys used
        if err.validator == "oneOf" and err.context:
            branch = 0 if isinstance(doc, dict) and "builtin" in doc else 1
            sub = [e for e in err.context if e.relative_schema_path[0] == branch] or err.context
            err = min(sub, key=lambda e: len(e.absolute_path))
        raise SchemaError(_json_path(err), err.message)


def system_from_definition(doc) -> FactorSystem:
    validate_definition(doc)
    if "builtin" in doc:
        sys = builtin_system(doc["builtin"], doc.get("max_stage"))
        if "name" in doc:
            sys.name = doc["name"]
        return sys
    return _explicit(doc)


def _explicit(doc) -> RuleSystem:
    name = doc["name"]
    start = doc.get("index", {}).get("start", 1)
    stages = {int(k): list(v) for k, v in doc["stages"].items()}
    top = max(stages)
    missing = [i for i in range(start, top + 1) if i not in stages]
    if missing or min(stages) < start:
        raise SchemaError("$.stages", f"stages must be exactly {start}..{top}; missing {missing}")

    def table(kind: str, lo_hi: bool) -> dict | None:
        if kind not in doc:
            return None
        raw = doc[kind]
        out = {}
        for i in range(start, top):
            src, dst = (i, i + 1) if lo_hi else (i + 1, i)
            key = f"{src}->{dst}"
            if key not in raw:
                raise SchemaError(f"$.{kind}", f"no entry for the stage pair {key}")
            t = raw[key]
            for a in stages[src]:
                if str(a) not in t:
                    raise SchemaError(f"$.{kind}.{key}", f"no image for state {a!r}")
            extra = set(t) - {str(a) for a in stages[src]}
            if extra:
                raise SchemaError(f"$.{kind}.{key}", f"unknown states {sorted(extra)} at stage {src}")
            images = {a: t[str(a)] for a in stages[src]}
            for a, b in images.items():
                if b not in stages[dst]:
                    raise SchemaError(f"$.{kind}.{key}.{a}", f"dangling state {b!r} at stage {dst}")
            out[(src, dst)] = images
        extra = set(raw) - {f"{i}->{i + 1}" if lo_hi else f"{i + 1}->{i}" for i in range(start, top)}
        if extra:
            raise SchemaError(f"$.{kind}", f"only adjacent stage pairs are allowed, got {sorted(extra)}")
        return out

    emb_t, proj_t = table("emb", True), table("proj", False)

    def emb(i, i2, a):
        for k in range(i, i2):
            a = emb_t[(k, k + 1)][a]
        return a

    def proj(i2, i, a):
        for k in range(i2, i, -1):
            a = proj_t[(k, k - 1)][a]
        return a

    if "pmap" in doc:
        rel = set()
        for n, (i2, a2, i, a) in enumerate(doc["pmap"]):
            for st, x in ((i2, a2), (i, a)):
                if st not in stages or x not in stages[st]:
                    raise SchemaError(f"$.pmap[{n}]", f"dangling state {x!r} at stage {st}")
            if i2 < i:
                raise SchemaError(f"$.pmap[{n}]", "the first stage must be the finer one")
            rel.add((i2, a2, i, a))

        def pmap(i2, a2, i, a):
            return a2 == a if i2 == i else (i2, a2, i, a) in rel
    elif proj_t is not None:
        def pmap(i2, a2, i, a):
            return proj(i2, i, a2) == a
    else:
        raise SchemaError("$", "an explicit system needs pmap or proj")

    return RuleSystem(name, NatIndex(start, top), lambda i: stages[i], pmap,
                      emb if emb_t is not None else None, proj if proj_t is not None else None,
                      max_stage=top, standard=True)


def load_system(path: str | Path) -> FactorSystem:
    """Load and validate a definition file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
    return system_from_definition(doc)


def resolve_system(name_or_path: str, bound=None) -> FactorSystem:
    """A builtin name, or a path to a definition file."""
    if name_or_path in BUILTIN_SYSTEMS:
        return builtin_system(name_or_path, bound)
    if Path(name_or_path).suffix == ".json" or Path(name_or_path).exists():
        return load_system(name_or_path)
    raise InputError(f"unknown system {name_or_path!r}: not a builtin ({', '.join(sorted(BUILTIN_SYSTEMS))}) "
                     f"and not a file")
