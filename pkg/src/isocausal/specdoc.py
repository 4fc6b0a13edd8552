"""JSON document validation and construction of domain objects.

Every file the command line accepts is a JSON object with a ``kind``
discriminator and a ``version`` field; each kind has a closed schema
(unknown fields are rejected with their location) and a builder that
turns the validated document into the package's domain objects.
Interval endpoints may be the strings ``"inf"``/``"-inf"`` where an
unbounded chart is meant, since JSON itself has no infinity literal.
"""

from __future__ import annotations

import json
import math

from jsonschema import Draft202012Validator

from .mapping import Chart, ExprMap, MetricField
from .products import (
    FiberSpec,
    GRWSpec,
    TimeProductSpec,
    circle_fiber,
    line_fiber,
    sphere_fiber,
)
from .waves import MpWaveSpec, PlaneWaveSpec

__all__ = [
    "SpecError",
    "KINDS",
    "document_schema",
    "validate_document",
    "load_document",
    "build",
]


class SpecError(ValueError):
    """A document failed schema validation or cross-field checks."""


_EXPR = {"type": "string", "minLength": 1}
_BOUND = {"anyOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}]}
_INTERVAL = {
    "type": "array",
    "items": _BOUND,
    "minItems": 2,
    "maxItems": 2,
}
_FINITE_INTERVAL = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}
_EXPR_MATRIX = {"type": "array", "items": {"type": "array", "items": _EXPR}}
_NAME_LIST = {"type": "array", "items": {"type": "string"}, "minItems": 1}


def _metric_schema() -> dict:
    return {
        "type": "object",
        "required": ["kind", "version", "coords", "bounds", "entries"],
        "properties": {
            "kind": {"const": "metric"},
            "version": {"const": 1},
            "coords": _NAME_LIST,
            "bounds": {"type": "array", "items": _INTERVAL},
            "entries": _EXPR_MATRIX,
            "orientation": {"type": "array", "items": _EXPR},
            "name": {"type": "string"},
        },
        "additionalProperties": False,
    }


_SCHEMAS = {
    "metric": _metric_schema(),
    "diffeo": {
        "type": "object",
        "required": ["kind", "version", "names", "components", "source", "target"],
        "properties": {
            "kind": {"const": "diffeo"},
            "version": {"const": 1},
            "names": _NAME_LIST,
            "components": {"type": "array", "items": _EXPR, "minItems": 1},
            "source": _metric_schema(),
            "target": _metric_schema(),
            "name": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "grw": {
        "type": "object",
        "required": ["kind", "version", "f", "interval"],
        "properties": {
            "kind": {"const": "grw"},
            "version": {"const": 1},
            "f": _EXPR,
            "interval": _INTERVAL,
            "fiber": {
                "anyOf": [
                    {"enum": ["circle", "sphere", "line"]},
                    {
                        "type": "object",
                        "properties": {
                            "dim": {"type": "integer", "minimum": 1},
                            "compact": {"type": "boolean"},
                            "complete": {"type": "boolean"},
                            "diameter": {"type": ["number", "null"]},
                            "name": {"type": "string"},
                        },
                        "additionalProperties": False,
                    },
                ]
            },
            "name": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "timeproduct": {
        "type": "object",
        "required": ["kind", "version", "rho", "interval", "fiber_metric"],
        "properties": {
            "kind": {"const": "timeproduct"},
            "version": {"const": 1},
            "rho": _EXPR,
            "interval": _INTERVAL,
            "fiber_names": _NAME_LIST,
            "fiber_bounds": {"type": "array", "items": _FINITE_INTERVAL},
            "fiber_metric": _EXPR_MATRIX,
            "omega": {"type": "array", "items": _EXPR},
            "periodic": {"type": "boolean"},
            "isotropic": {"type": "boolean"},
            "name": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "mpwave": {
        "type": "object",
        "required": ["kind", "version", "profile", "fiber_metric"],
        "properties": {
            "kind": {"const": "mpwave"},
            "version": {"const": 1},
            "profile": _EXPR,
            "fiber_metric": _EXPR_MATRIX,
            "fiber_names": _NAME_LIST,
            "u_bounds": _FINITE_INTERVAL,
            "v_bounds": _FINITE_INTERVAL,
            "fiber_bounds": {"type": "array", "items": _FINITE_INTERVAL},
            "name": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "planewave": {
        "type": "object",
        "required": ["kind", "version", "frequency"],
        "properties": {
            "kind": {"const": "planewave"},
            "version": {"const": 1},
            "frequency": _EXPR_MATRIX,
            "h": {
                "anyOf": [
                    {"type": "null"},
                    {"type": "array", "items": {"type": "array",
                                                "items": {"type": "number"}}},
                ]
            },
            "locallySymmetric": {"type": "boolean"},
            "u_bounds": _FINITE_INTERVAL,
            "name": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "gridjob": {
        "type": "object",
        "required": ["kind", "version", "fixture"],
        "properties": {
            "kind": {"const": "gridjob"},
            "version": {"const": 1},
            "fixture": {"type": "string", "minLength": 1},
            "source": _FINITE_INTERVAL,
            "relation": {"enum": ["J", "I"]},
            "shape": {
                "type": "array",
                "items": {"type": "integer", "minimum": 2},
                "minItems": 2,
                "maxItems": 2,
            },
            "name": {"type": "string"},
        },
        "additionalProperties": False,
    },
}

KINDS = tuple(sorted(_SCHEMAS))

_VALIDATORS = {kind: Draft202012Validator(schema)
               for kind, schema in _SCHEMAS.items()}


def document_schema(kind: str) -> dict:
    """Return the JSON schema for one document kind."""
    if kind not in _SCHEMAS:
        raise SpecError(f"unknown document kind {kind!r}; "
                        f"expected one of {', '.join(KINDS)}")
    return _SCHEMAS[kind]


def validate_document(doc) -> str:
    """Check a parsed document against its schema and return its kind."""
    if not isinstance(doc, dict):
        raise SpecError("document must be a JSON object")
    kind = doc.get("kind")
    if kind not in _SCHEMAS:
        raise SpecError(f"unknown document kind {kind!r}; "
                        f"expected one of {', '.join(KINDS)}")
    errors = sorted(_VALIDATORS[kind].iter_errors(doc),
                    key=lambda e: (len(e.path), e.json_path))
    if errors:
        err = errors[0]
        raise SpecError(f"{err.json_path}: {err.message}")
    return kind


def load_document(path) -> dict:
    """Read, parse and validate a JSON document from disk."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: not valid JSON ({exc})") from exc
    validate_document(doc)
    return doc


def _endpoint(value) -> float:
    return float(value)


def _interval(pair) -> tuple:
    lo, hi = (_endpoint(v) for v in pair)
    if not lo < hi:
        raise SpecError(f"interval [{pair[0]}, {pair[1]}] is empty")
    return (lo, hi)


def _square(matrix, what: str) -> tuple:
    n = len(matrix)
    for row in matrix:
        if len(row) != n:
            raise SpecError(f"{what} must be square, got a row of "
                            f"length {len(row)} in a {n}-row matrix")
    return tuple(tuple(row) for row in matrix)


def build_metric(doc) -> MetricField:
    coords = tuple(doc["coords"])
    bounds = tuple(_interval(b) for b in doc["bounds"])
    if len(bounds) != len(coords):
        raise SpecError(f"{len(coords)} coordinates but {len(bounds)} bounds")
    entries = _square(doc["entries"], "entries")
    if len(entries) != len(coords):
        raise SpecError(f"{len(coords)} coordinates but "
                        f"{len(entries)} metric rows")
    orientation = doc.get("orientation")
    if orientation is not None:
        if len(orientation) != len(coords):
            raise SpecError("orientation length must match the coordinates")
        orientation = tuple(orientation)
    chart = Chart(coords, bounds)
    return MetricField(chart, entries, orientation=orientation,
                       name=doc.get("name", "metric"))


def build_map(doc):
    """Return (phi, source field, target field) from a diffeo document."""
    names = tuple(doc["names"])
    components = tuple(doc["components"])
    if len(components) != len(names):
        raise SpecError("component count must match the coordinate names")
    source = build_metric(doc["source"])
    target = build_metric(doc["target"])
    if len(names) != len(source.chart.coords):
        raise SpecError("map arity must match the source chart")
    return ExprMap(names, components), source, target


_FIBERS = {"circle": circle_fiber, "sphere": sphere_fiber, "line": line_fiber}


def build_grw(doc) -> GRWSpec:
    fiber = doc.get("fiber", "circle")
    if isinstance(fiber, str):
        fiber = _FIBERS[fiber]()
    else:
        fiber = FiberSpec(**fiber)
    return GRWSpec(interval=_interval(doc["interval"]), f=doc["f"], fiber=fiber)


def build_timeproduct(doc) -> TimeProductSpec:
    metric = _square(doc["fiber_metric"], "fiber_metric")
    names = tuple(doc.get("fiber_names", ("x",)))
    if len(metric) != len(names):
        raise SpecError("fiber metric size must match the fiber names")
    bounds = tuple(_interval(b) for b in doc.get("fiber_bounds",
                                                 ((-1.0, 1.0),) * len(names)))
    if len(bounds) != len(names):
        raise SpecError("fiber bounds count must match the fiber names")
    omega = doc.get("omega")
    if omega is not None:
        omega = tuple(omega)
        if len(omega) != len(names):
            raise SpecError("omega length must match the fiber names")
    return TimeProductSpec(
        interval=_interval(doc["interval"]),
        rho=doc.get("rho", "1"),
        fiber_names=names,
        fiber_bounds=bounds,
        fiber_metric=metric,
        omega=omega,
        periodic=doc.get("periodic", False),
        isotropic=doc.get("isotropic", False),
    )


def build_mpwave(doc) -> MpWaveSpec:
    metric = _square(doc["fiber_metric"], "fiber_metric")
    names = tuple(doc.get("fiber_names",
                          tuple(f"x{i + 1}" for i in range(len(metric)))))
    if len(names) != len(metric):
        raise SpecError("fiber metric size must match the fiber names")
    bounds = tuple(_interval(b) for b in doc.get("fiber_bounds",
                                                 ((-5.0, 5.0),) * len(names)))
    if len(bounds) != len(names):
        raise SpecError("fiber bounds count must match the fiber names")
    return MpWaveSpec(
        profile=doc["profile"],
        fiber_metric=metric,
        fiber_names=names,
        u_bounds=_interval(doc.get("u_bounds", (-5.0, 5.0))),
        v_bounds=_interval(doc.get("v_bounds", (-5.0, 5.0))),
        fiber_bounds=bounds,
        name=doc.get("name", ""),
    )


def build_planewave(doc) -> PlaneWaveSpec:
    freq = _square(doc["frequency"], "frequency")
    h = doc.get("h")
    if h is not None:
        h = _square(h, "h")
        if len(h) != len(freq):
            raise SpecError("h size must match the frequency matrix")
        h = tuple(tuple(float(v) for v in row) for row in h)
    return PlaneWaveSpec(
        frequency=freq,
        h=h,
        locallySymmetric=doc.get("locallySymmetric", False),
        u_bounds=_interval(doc.get("u_bounds", (-5.0, 5.0))),
        name=doc.get("name", ""),
    )


def build_gridjob(doc) -> dict:
    """Normalized grid job: fixture token, optional shape/source, relation."""
    job = {
        "fixture": doc["fixture"],
        "shape": tuple(doc["shape"]) if "shape" in doc else None,
        "source": tuple(float(v) for v in doc["source"]) if "source" in doc
        else None,
        "relation": doc.get("relation", "J"),
    }
    if not (job["source"] is None or math.isfinite(job["source"][0])):
        raise SpecError("source point must be finite")
    return job


_BUILDERS = {
    "metric": build_metric,
    "diffeo": build_map,
    "grw": build_grw,
    "timeproduct": build_timeproduct,
    "mpwave": build_mpwave,
    "planewave": build_planewave,
    "gridjob": build_gridjob,
}


def build(doc):
    """Validate and construct the domain object for any document kind."""
    kind = validate_document(doc)
    return _BUILDERS[kind](doc)
