"""Experiment configuration: schema, defaults, canonical hashing.

Configs are JSON documents.  Validation happens against an explicit schema,
defaults are merged into a fully resolved document, and the sha256 of the
canonical serialization of that resolved document is embedded into every
result record, so records can always be traced to the exact inputs that
produced them.
"""

import copy
import hashlib
import json
from pathlib import Path

import jsonschema

from .errors import ConfigError

_LADDER = {
    "oneOf": [
        {"type": "array", "items": {"type": "number"}, "minItems": 1},
        {
            "type": "object",
            "properties": {
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "count": {"type": "integer", "minimum": 1},
            },
            "required": ["start", "stop", "count"],
            "additionalProperties": False,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "experiment_id": {"type": "string", "minLength": 1},
        "matrix": {
            "oneOf": [
                {"type": "array",
                 "items": {"type": "array", "items": {"type": "integer"}}},
                {"type": "object",
                 "properties": {"path": {"type": "string"}},
                 "required": ["path"], "additionalProperties": False},
            ]
        },
        "bump_field": {
            "type": "object",
            "properties": {
                "bumps": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {
                            "center": {"type": "array", "items": {"type": "number"}},
                            "radius": {"type": "number", "exclusiveMinimum": 0},
                            "direction": {"type": "array", "items": {"type": "number"}},
                        },
                        "required": ["center", "radius", "direction"],
                        "additionalProperties": False,
                    },
                }
            },
            "required": ["bumps"],
            "additionalProperties": False,
        },
        "amplitudes": _LADDER,
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "output_dir": {"type": "string"},
        "budget": {
            "type": "object",
            "properties": {
                "max_vertices": {"type": "integer", "minimum": 1000},
                "max_probe_cells": {"type": "integer", "minimum": 64},
                "max_leaf_samples": {"type": "integer", "minimum": 1000},
            },
            "additionalProperties": False,
        },
        "schedules": {
            "type": "object",
            "properties": {
                "entropy": {
                    "type": "object",
                    "properties": {
                        "n_values": {"type": "array", "items": {"type": "integer"}},
                        "epsilons": {"type": "array", "items": {"type": "number"}},
                        "grid_resolution": {"type": "integer", "minimum": 2},
                        "max_candidates": {"type": "integer", "minimum": 16},
                        "fit_window": {"type": "array", "items": {"type": "integer"},
                                       "minItems": 2, "maxItems": 2},
                        "plateau_tol": {"type": "number", "exclusiveMinimum": 0},
                    },
                    "additionalProperties": False,
                },
                "unstable_entropy": {
                    "type": "object",
                    "properties": {
                        "n_values": {"type": "array", "items": {"type": "integer"}},
                        "epsilons": {"type": "array", "items": {"type": "number"}},
                        "delta": {"type": "number", "exclusiveMinimum": 0},
                        "eps_geom": {"type": "number", "exclusiveMinimum": 0},
                        "x_sample_count": {"type": "integer", "minimum": 1},
                        "plateau_tol": {"type": "number", "exclusiveMinimum": 0},
                    },
                    "additionalProperties": False,
                },
                "volume_growth": {
                    "type": "object",
                    "properties": {
                        "delta": {"type": "number", "exclusiveMinimum": 0},
                        "n_max": {"type": "integer", "minimum": 2},
                        "eps_geom": {"type": "number", "exclusiveMinimum": 0},
                        "fit_window": {"type": "array", "items": {"type": "integer"},
                                       "minItems": 2, "maxItems": 2},
                    },
                    "additionalProperties": False,
                },
                "center_growth": {
                    "type": "object",
                    "properties": {
                        "horizon": {"type": "integer", "minimum": 2},
                        "sample_count": {"type": "integer", "minimum": 1},
                        "rate_tol": {"type": "number", "exclusiveMinimum": 0},
                        "bound": {"type": ["number", "null"]},
                    },
                    "additionalProperties": False,
                },
                "ruelle": {
                    "type": "object",
                    "properties": {
                        "n_power": {"type": "integer", "minimum": 1},
                        "sample_count": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
                "ueg": {
                    "type": "object",
                    "properties": {
                        "rho": {"type": "number", "exclusiveMinimum": 0},
                        "delta": {"type": "number", "exclusiveMinimum": 0},
                        "n_steps": {"type": "integer", "minimum": 1},
                        "basepoints": {"type": "integer", "minimum": 1},
                        "eps_geom": {"type": "number", "exclusiveMinimum": 0},
                    },
                    "additionalProperties": False,
                },
                "density": {
                    "type": "object",
                    "properties": {
                        "tau": {"type": ["number", "null"]},
                        "n_values": {"type": "array", "items": {"type": "integer"}},
                        "probe_resolution": {"type": "number", "exclusiveMinimum": 0},
                        "fit_window": {"type": "array", "items": {"type": "integer"},
                                       "minItems": 2, "maxItems": 2},
                    },
                    "additionalProperties": False,
                },
                "mixing": {
                    "type": "object",
                    "properties": {
                        "delta": {"type": "number", "exclusiveMinimum": 0},
                        "n_values": {"type": "array", "items": {"type": "integer"}},
                        "quad_h": {"type": "number", "exclusiveMinimum": 0},
                        "quad_g": {"type": "integer", "minimum": 8},
                        "phi": {"$ref": "#/$defs/observable"},
                        "psi": {"$ref": "#/$defs/observable"},
                        "basepoint": {"type": "array", "items": {"type": "number"}},
                    },
                    "additionalProperties": False,
                },
                "rect_hit": {
                    "type": "object",
                    "properties": {
                        "n": {"type": "integer", "minimum": 1},
                        "eps": {"type": "number", "exclusiveMinimum": 0},
                        "delta": {"type": "number", "exclusiveMinimum": 0},
                        "k_max": {"type": "integer", "minimum": 1},
                        "basepoint": {"type": "array", "items": {"type": "number"}},
                        "x": {"type": "array", "items": {"type": "number"}},
                    },
                    "additionalProperties": False,
                },
                "c1": {
                    "type": "object",
                    "properties": {
                        "sample_count": {"type": "integer", "minimum": 1},
                    },
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
    },
    "required": ["experiment_id", "matrix"],
    "additionalProperties": False,
    "$defs": {
        "observable": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["bump", "constant"]},
                "center": {"type": "array", "items": {"type": "number"}},
                "r": {"type": "number"},
                "margin": {"type": "number"},
                "value": {"type": "number"},
            },
            "required": ["kind"],
        },
    },
}

DEFAULT_CONFIG = {
    "bump_field": {
        "bumps": [
            {"center": [0.3, 0.6], "radius": 0.2, "direction": [1.0, 0.0]},
            {"center": [0.7, 0.2], "radius": 0.15, "direction": [0.0, 1.0]},
        ]
    },
    # negative stop is the "safe bound" sentinel: the sweep tops the ladder out
    # at |stop| times the strict invertibility threshold of (base, field)
    "amplitudes": {"start": 0.0, "stop": -0.25, "count": 6},
    "seed": 0,
    "threads": 1,
    "output_dir": "results",
    "budget": {
        "max_vertices": 5_000_000,
        "max_probe_cells": 1 << 24,
        "max_leaf_samples": 2_000_000_000,
    },
    "schedules": {
        "entropy": {
            "n_values": list(range(1, 8)),
            "epsilons": [0.2, 0.1],
            "grid_resolution": 1_000_000,
            "max_candidates": 150_000,
            "fit_window": [3, 7],
            "plateau_tol": 0.05,
        },
        "unstable_entropy": {
            "n_values": list(range(2, 11)),
            "epsilons": [0.04, 0.02],
            "delta": 0.1,
            "eps_geom": 0.01,
            "x_sample_count": 3,
            "plateau_tol": 0.05,
        },
        "volume_growth": {
            "delta": 0.1,
            "n_max": 9,
            "eps_geom": 0.01,
            "fit_window": [3, 9],
        },
        "center_growth": {
            "horizon": 48,
            "sample_count": 64,
            "rate_tol": 0.05,
            "bound": None,
        },
        "ruelle": {"n_power": 20, "sample_count": 256},
        "ueg": {"rho": 0.1, "delta": 0.05, "n_steps": 6, "basepoints": 16,
                "eps_geom": 0.01},
        "density": {
            "tau": None,
            "n_values": list(range(4, 15)),
            "probe_resolution": 1.5625e-3,
            "fit_window": [4, 14],
        },
        "mixing": {
            "delta": 0.12,
            "n_values": list(range(1, 8)),
            "quad_h": 2e-5,
            "quad_g": 512,
            "phi": {"kind": "bump", "center": [0.3, 0.7], "r": 0.15, "margin": 0.12},
            "psi": {"kind": "bump", "center": [0.2, 0.4], "r": 0.12, "margin": 0.1},
            "basepoint": [0.15, 0.35],
        },
        "rect_hit": {
            "n": 8,
            "eps": 0.05,
            "delta": 0.1,
            "k_max": 12,
            "basepoint": [0.25, 0.55],
            "x": [0.7, 0.1],
        },
        "c1": {"sample_count": 2048},
    },
}


def _merge_defaults(raw, defaults):
    out = copy.deepcopy(defaults)
    for key, value in raw.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge_defaults(value, out[key])
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(raw, base_dir=None):
    """Validate a raw config document and merge it over the defaults.

    Matrix file references are resolved relative to base_dir and inlined so
    the resolved document is self-contained (and so the hash covers the
    actual matrix, not the path).
    """
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config schema violation: {exc.message}") from exc
    resolved = _merge_defaults(raw, DEFAULT_CONFIG)
    matrix = resolved["matrix"]
    if isinstance(matrix, dict):
        from .linear import parse_matrix_text

        path = Path(matrix["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            resolved["matrix"] = parse_matrix_text(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read matrix file {path}: {exc}") from exc
    ladder = resolved["amplitudes"]
    if isinstance(ladder, dict):
        start, stop, count = ladder["start"], ladder["stop"], ladder["count"]
        if stop < 0:
            resolved["amplitudes"] = {"start": start, "stop": stop, "count": count}
        else:
            step = (stop - start) / max(count - 1, 1)
            resolved["amplitudes"] = [start + i * step for i in range(count)]
    return resolved


def canonical_json(document):
    return json.dumps(document, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True)


# execution-only keys: they steer where and how fast results are produced,
# never what they are, so reruns at other thread counts keep the same hash
_EXECUTION_KEYS = ("threads", "output_dir")


def config_hash(resolved):
    doc = {k: v for k, v in resolved.items() if k not in _EXECUTION_KEYS}
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def load_config(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return resolve_config(raw, base_dir=path.parent)
