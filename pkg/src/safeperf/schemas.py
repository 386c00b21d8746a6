"""JSON schemas for every document the package reads."""

from __future__ import annotations

from typing import Any

import jsonschema

from .errors import ValidationError

# decimal or scientific-notation strings are accepted wherever a number is
NUMBER = {"anyOf": [
    {"type": "number"},
    {"type": "string", "pattern": r"^\s*[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?\s*$"},
]}

QSO = {
    "type": "object",
    "required": ["value", "unit"],
    "properties": {
        "value": NUMBER,
        "unit": {"enum": ["per-flight-hour", "per-flight", "per-encounter"]},
    },
}

EXPOSURE = {
    "type": "object",
    "required": ["avg_flight_hours", "encounters_per_flight"],
    "properties": {"avg_flight_hours": NUMBER, "encounters_per_flight": NUMBER},
}

FAULT_TREE = {
    "type": "object",
    "required": ["root", "nodes"],
    "properties": {
        "root": {"type": "string"},
        "nodes": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {
                "type": "object",
                "required": ["type"],
                "properties": {
                    "type": {"enum": ["AND", "OR", "KOFN", "BASIC"]},
                    "children": {"type": "array", "items": {"type": "string"}},
                    "k": {"type": "integer"},
                    "probability": NUMBER,
                    "category": {"enum": ["hardware-random", "ml-insufficiency"]},
                    "budget": QSO,
                    "description": {"type": "string"},
                },
            },
        },
    },
}

KINEMATICS = {
    "type": "object",
    "required": ["taxi_speed", "max_decel", "reaction_time", "detection_distance",
                 "detection_frequency"],
    "properties": {k: NUMBER for k in ("taxi_speed", "max_decel", "reaction_time",
                                       "detection_distance", "detection_frequency")},
}

SCENARIO = {
    "type": "object",
    "required": ["exposure", "fault_tree", "mlc_event", "detection", "operating_point", "gap"],
    "properties": {
        "schema_version": {"const": 1},
        "name": {"type": "string"},
        "severity": {"enum": ["MINOR", "MAJOR", "HAZARDOUS", "CATASTROPHIC"]},
        "top_qso": QSO,
        "exposure": EXPOSURE,
        "fault_tree": FAULT_TREE,
        "mlc_event": {"type": "string"},
        "detection": {
            "type": "object",
            "properties": {"n": {"type": "integer", "minimum": 1}, "kinematics": KINEMATICS},
            "anyOf": [{"required": ["n"]}, {"required": ["kinematics"]}],
        },
        "operating_point": {
            "type": "object",
            "required": ["policy", "p_miss"],
            "properties": {
                "policy": {"enum": ["explicit", "margin-based"]},
                "x_min": {"type": "integer", "minimum": 0},
                "p_miss": NUMBER,
                "prefer": {"enum": ["strictest", "loosest"]},
            },
        },
        "gap": {
            "type": "object",
            "required": ["safety_margin", "delta"],
            "properties": {
                "safety_margin": NUMBER,
                "delta": NUMBER,
                "critical_decimals": {"type": ["integer", "null"], "minimum": 0},
                "binds": {"type": "array", "items": {"type": "string"}},
            },
        },
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}

MEASURED = {
    "type": "object",
    "required": ["metrics"],
    "properties": {
        "schema_version": {"const": 1},
        "dataset_id": {"type": "string"},
        "metrics": {
            "type": "object",
            "additionalProperties": {
                "anyOf": [
                    NUMBER,
                    {
                        "type": "object",
                        "required": ["value"],
                        "properties": {
                            "value": NUMBER,
                            "dataset_size": {"type": "integer", "minimum": 0},
                            "dataset_id": {"type": "string"},
                        },
                    },
                ]
            },
        },
    },
}

REQUIREMENT_SET = {
    "type": "object",
    "required": ["schema_version", "records"],
    "properties": {
        "schema_version": {"const": 1},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "metric", "comparator", "target", "traces_to"],
                "properties": {
                    "comparator": {"enum": ["<", "<=", ">="]},
                    "target": {"type": "number"},
                    "traces_to": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
    },
}


def validate(doc: Any, schema: dict, what: str) -> None:
    """Raise :class:`ValidationError` naming the first offending field."""
    errors = sorted(
        jsonschema.Draft7Validator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path)
    )
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path)
        raise ValidationError(err.message, f"{what}.{path}" if path else what)
