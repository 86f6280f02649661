"""JSON schemas for every input file kind and loaders that turn checked JSON into objects."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .atlas import KuranishiAtlas, StrictMorphism
from .charts import ChartError, KuranishiChart, LinfChart
from .polycore import PolyMap
from .su2rep.presentation import GroupPresentation
from .vfc import ChartFamily

_num = {"type": "number"}
_int = {"type": "integer"}

DEFS = {
    "polymap": {
        "type": "object",
        "required": ["n_in", "n_out", "coords"],
        "properties": {
            "n_in": {"type": "integer", "minimum": 0},
            "n_out": {"type": "integer", "minimum": 0},
            "coords": {
                "type": "array",
                "items": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["exp", "c"],
                        "properties": {"exp": {"type": "array", "items": {"type": "integer", "minimum": 0}}, "c": _num},
                    },
                },
            },
        },
    },
    "boxunion": {
        "type": "object",
        "required": ["dim", "boxes"],
        "properties": {
            "dim": {"type": "integer", "minimum": 0},
            "boxes": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["lo", "hi"],
                    "properties": {"lo": {"type": "array", "items": _num}, "hi": {"type": "array", "items": _num}},
                },
            },
        },
    },
    "chart": {
        "type": "object",
        "required": ["domain", "m", "section"],
        "properties": {
            "id": {"type": "string"},
            "domain": {"$ref": "#/$defs/boxunion"},
            "m": {"type": "integer", "minimum": 0},
            "section": {"$ref": "#/$defs/polymap"},
            "orientation": {"enum": [1, -1]},
            "footprint": {
                "type": "array",
                "items": {"type": "object", "required": ["label", "x"], "properties": {"label": {"type": "string"}, "x": {"type": "array", "items": _num}}},
            },
        },
    },
    "atlas": {
        "type": "object",
        "required": ["vdim", "charts"],
        "properties": {
            "vdim": _int,
            "charts": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/chart"}},
            "footprint": {"type": "array", "items": {"type": "object", "required": ["label"], "properties": {"label": {"type": "string"}}}},
            "transitions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["i", "j", "dom_i", "dom_j", "f", "fhat"],
                    "properties": {
                        "i": {"type": "string"},
                        "j": {"type": "string"},
                        "dom_i": {"$ref": "#/$defs/boxunion"},
                        "dom_j": {"$ref": "#/$defs/boxunion"},
                        "f": {"$ref": "#/$defs/polymap"},
                        "fhat": {"$ref": "#/$defs/polymap"},
                    },
                },
            },
            "lambdas": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["i", "j", "k", "lam"],
                    "properties": {"i": {"type": "string"}, "j": {"type": "string"}, "k": {"type": "string"}, "lam": {"$ref": "#/$defs/polymap"}},
                },
            },
        },
    },
    "strict_morphism": {
        "type": "object",
        "required": ["tau", "maps"],
        "properties": {
            "tau": {"type": "object", "additionalProperties": {"type": "string"}},
            "maps": {
                "type": "array",
                "items": {"type": "object", "required": ["i", "f", "fhat"], "properties": {"i": {"type": "string"}, "f": {"$ref": "#/$defs/polymap"}, "fhat": {"$ref": "#/$defs/polymap"}}},
            },
            "deltas": {
                "type": "array",
                "items": {"type": "object", "required": ["i", "j", "lam"], "properties": {"i": {"type": "string"}, "j": {"type": "string"}, "lam": {"$ref": "#/$defs/polymap"}}},
            },
        },
    },
}

SCHEMAS = {
    "polymap": {"$ref": "#/$defs/polymap"},
    "chart": {"$ref": "#/$defs/chart"},
    "atlas": {"$ref": "#/$defs/atlas"},
    "family": {
        "type": "object",
        "required": ["domain", "m", "section"],
        "properties": {
            "id": {"type": "string"},
            "domain": {"$ref": "#/$defs/boxunion"},
            "m": {"type": "integer", "minimum": 0},
            "section": {"$ref": "#/$defs/polymap"},
            "orientation": {"enum": [1, -1]},
        },
    },
    "mapped_chart": {
        "type": "object",
        "required": ["chart", "map"],
        "properties": {"chart": {"$ref": "#/$defs/chart"}, "map": {"$ref": "#/$defs/polymap"}},
    },
    "morphism": {
        "type": "object",
        "required": ["target", "morphism"],
        "properties": {"target": {"$ref": "#/$defs/atlas"}, "morphism": {"$ref": "#/$defs/strict_morphism"}},
    },
    "presentation": {
        "type": "object",
        "required": ["generators", "relators"],
        "properties": {
            "generators": {"type": "array", "items": {"type": "string"}},
            "relators": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "array", "prefixItems": [{"type": "integer", "minimum": 0}, {"type": "integer", "not": {"const": 0}}], "minItems": 2, "maxItems": 2}},
            },
        },
    },
    "linf": {
        "type": "object",
        "required": ["h1", "h2", "brackets", "radius"],
        "properties": {
            "h1": {"type": "integer", "minimum": 0},
            "h2": {"type": "integer", "minimum": 0},
            "brackets": {"type": "object"},
            "pairing": {"type": ["array", "null"]},
            "radius": {"type": "number", "exclusiveMinimum": 0},
        },
    },
}

_BUILDERS = {
    "polymap": PolyMap.from_dict,
    "chart": KuranishiChart.from_dict,
    "atlas": KuranishiAtlas.from_dict,
    "family": ChartFamily.from_dict,
    "mapped_chart": lambda d: (KuranishiChart.from_dict(d["chart"]), PolyMap.from_dict(d["map"])),
    "morphism": lambda d: (KuranishiAtlas.from_dict(d["target"]), StrictMorphism.from_dict(d["morphism"])),
    "presentation": GroupPresentation.from_dict,
    "linf": LinfChart.from_dict,
}


class InputError(ValueError):
    """Malformed input; ``path`` is the JSON path of the first violation."""

    def __init__(self, msg, path="$"):
        super().__init__(f"{path}: {msg}")
        self.path = path


def schema(kind):
    return {"$schema": "https://json-schema.org/draft/2020-12/schema", "$defs": DEFS, **SCHEMAS[kind]}


def guess_kind(data):
    if not isinstance(data, dict):
        return "chart"
    if "charts" in data:
        return "atlas"
    if "relators" in data:
        return "presentation"
    if "brackets" in data:
        return "linf"
    if "chart" in data and "map" in data:
        return "mapped_chart"
    if "target" in data and "morphism" in data:
        return "morphism"
    if "coords" in data:
        return "polymap"
    try:
        # a family section takes one more variable than the chart domain
        if data["section"]["n_in"] == data["domain"]["dim"] + 1 and "footprint" not in data:
            return "family"
    except (KeyError, TypeError):
        pass
    return "chart"


def _charts_in(kind, data):
    """(JSON path, node) of each chart inside a document, keyed by chart id."""
    if kind == "chart":
        nodes = {"$": data}
    elif kind == "atlas":
        nodes = {f"$.charts[{k}]": c for k, c in enumerate(data["charts"])}
    elif kind == "mapped_chart":
        nodes = {"$.chart": data["chart"]}
    else:
        nodes = {}
    return {str(c.get("id", "chart")): (p, c) for p, c in nodes.items()}


def _chart_error_path(kind, data, e: ChartError):
    for cid, (path, node) in _charts_in(kind, data).items():
        if not str(e).startswith(f"chart {cid}:"):
            continue
        for k, fp in enumerate(node.get("footprint", [])):
            if e.label is not None and fp["label"] == e.label:
                return f"{path}.footprint[{k}]"
        return path
    return "$"


def parse(data, kind=None):
    """Schema-check ``data`` and build the object; raises InputError with a JSON path."""
    kind = kind or guess_kind(data)
    if kind not in SCHEMAS:
        raise InputError(f"unknown input kind {kind!r}")
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema(kind)).iter_errors(data))
    if err is not None:
        raise InputError(err.message, err.json_path)
    try:
        return _BUILDERS[kind](data)
    except ChartError as e:
        raise InputError(str(e), _chart_error_path(kind, data, e)) from e
    except (ValueError, KeyError, IndexError, TypeError) as e:
        raise InputError(f"{type(e).__name__}: {e}") from e


def validate_input(path, kind=None):
    """Read, schema-check and build the object stored at ``path``."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return parse(data, kind)


def to_data(obj):
    """Inverse of :func:`parse`: the JSON-able form of any parsed input object."""
    if isinstance(obj, tuple) and len(obj) == 2:
        first, second = obj
        if isinstance(first, KuranishiAtlas):
            return {"target": first.to_dict(), "morphism": second.to_dict()}
        return {"chart": first.to_dict(), "map": second.to_dict()}
    return obj.to_dict()


def dumps(obj):
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
