"""Configuration schemas, parsing helpers and deterministic output writers.

A config is a JSON object with ``command``, optional ``seed`` and either an
``inputs`` object or the command inputs at the top level.  Outputs are
written with sorted keys and shortest round-trip float formatting, so equal
(config, seed) pairs give byte-identical files.
"""

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .algebra import ComplexMatrixField, as_field, field_from_json, matrix_from_json
from .semigroup.domain import build_domain

COMMANDS = ("delta", "range", "certify", "flow", "bilinear", "contract",
            "spectrum", "rigidity")


class ConfigError(ValueError):
    """Schema violation with the offending field named."""


# --------------------------------------------------------------------------
# schemas

_NUM = {"type": "number"}
_P = {"type": "number", "exclusiveMinimum": 1}
_POS_INT = {"type": "integer", "minimum": 1}
_MATRIX = {
    "type": "object",
    "oneOf": [
        {"required": ["phase"],
         "properties": {"phase": _NUM, "d": _POS_INT, "scale": _NUM}},
        {"required": ["re"],
         "properties": {"re": {"type": "array"}, "im": {"type": "array"}}},
        {"required": ["cells", "d"],
         "properties": {"cells": {"type": "array", "minItems": 1},
                        "d": _POS_INT,
                        "cell_shape": {"type": "array", "items": _POS_INT}}},
        {"required": ["kind", "first", "second"],
         "properties": {"kind": {"const": "halves"},
                        "axis": {"enum": [0, 1]}}},
    ],
}
_DOMAIN = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["interval", "rectangle", "l_shape", "bitmap", "horn"]},
        "n": _POS_INT, "nx": _POS_INT, "ny": _POS_INT,
        "length": _NUM, "lx": _NUM, "h": _NUM,
        "alpha": _NUM, "c": _NUM, "x_max": _NUM,
        "bitmap": {"type": "array"},
        "dirichlet": {"anyOf": [{"enum": ["all", "none"]},
                                {"type": "array", "items": {
                                    "enum": ["left", "right", "bottom", "top"]}}]},
    },
}
_GRID = {
    "anyOf": [
        {"type": "number"},
        {"type": "array", "items": _NUM, "minItems": 1},
        {"type": "object", "required": ["start", "stop", "num"],
         "properties": {"start": _NUM, "stop": _NUM, "num": _POS_INT,
                        "spacing": {"enum": ["linear", "log"]}}},
    ],
}

INPUT_SCHEMAS = {
    "delta": {"required": ["A", "p"],
              "properties": {"A": _MATRIX, "p": _P, "angle": {"type": "boolean"}}},
    "range": {"required": ["A"],
              "properties": {"A": _MATRIX, "p_max": _P}},
    "certify": {"required": ["target", "p", "A", "B"],
                "properties": {"target": {"enum": ["q", "power", "pp", "r"]},
                               "p": _P, "A": _MATRIX, "B": _MATRIX,
                               "delta": {"type": "number", "exclusiveMinimum": 0,
                                         "exclusiveMaximum": 1},
                               "n_samples": _POS_INT, "tol": _NUM,
                               "nu": {"type": "number", "exclusiveMinimum": 0,
                                      "maximum": 1},
                               "ns": {"type": "array", "items": _POS_INT},
                               "c1": {"type": "number", "exclusiveMinimum": 0}}},
    "flow": {"required": ["domain", "A", "p", "times"],
             "properties": {"domain": _DOMAIN, "A": _MATRIX, "B": _MATRIX,
                            "p": {"type": "number", "minimum": 2},
                            "delta": {"type": "number", "exclusiveMinimum": 0,
                                      "exclusiveMaximum": 1},
                            "times": _GRID, "fd_rel": _NUM}},
    "bilinear": {"required": ["domain", "A", "p"],
                 "properties": {"domain": _DOMAIN, "A": _MATRIX, "B": _MATRIX,
                                "p": _P, "n_pairs": _POS_INT,
                                "per_decade": _POS_INT}},
    "contract": {"required": ["domain", "A", "p"],
                 "properties": {"domain": _DOMAIN, "A": _MATRIX, "p": _P,
                                "n_states": _POS_INT, "times": _GRID,
                                "tol": _NUM, "search": {"type": "boolean"}}},
    "spectrum": {"required": ["p"],
                 "properties": {"p": _P,
                                "alpha": {"type": "number", "exclusiveMinimum": 0},
                                "y": _GRID, "tangency": {"type": "boolean"},
                                "y_max": {"type": "number", "exclusiveMinimum": 0}}},
    "rigidity": {"required": ["A", "profile"],
                 "properties": {"A": _MATRIX,
                                "profile": {"type": "object", "required": ["kind"],
                                            "properties": {"kind": {"enum": [
                                                "flat_quadratic", "power",
                                                "constant"]}}},
                                "n_samples": _POS_INT, "r_max": _NUM, "tol": _NUM}},
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["command"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "inputs": {"type": "object"},
        "outputPath": {"type": "string"},
    },
}


def _where(err):
    path = "/".join(str(x) for x in err.absolute_path)
    return path or "<root>"


def _validate(obj, schema, prefix=""):
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"{prefix}{_where(err)}: {err.message}")


def normalize_config(cfg, seed=None):
    """Validated ``{"command", "seed", "inputs", "outputPath"}`` dictionary.

    Top-level keys other than the reserved ones are treated as inputs when
    no ``inputs`` object is given.  ``seed`` overrides the config seed.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("<root>: config must be a JSON object")
    _validate(cfg, CONFIG_SCHEMA)
    reserved = {"command", "seed", "inputs", "outputPath"}
    if "inputs" in cfg:
        extra = sorted(set(cfg) - reserved)
        if extra:
            raise ConfigError(f"{extra[0]}: unexpected key next to 'inputs'")
        inputs = dict(cfg["inputs"])
    else:
        inputs = {k: v for k, v in cfg.items() if k not in reserved}
    command = cfg["command"]
    schema = dict(INPUT_SCHEMAS[command], type="object")
    _validate(inputs, schema, prefix="inputs/")
    out = {"command": command,
           "seed": int(cfg.get("seed", 0) if seed is None else seed),
           "inputs": inputs}
    if "outputPath" in cfg:
        out["outputPath"] = cfg["outputPath"]
    return out


def load_config(path, seed=None):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<root>: invalid JSON ({exc})") from exc
    return normalize_config(cfg, seed)


def config_hash(cfg):
    """sha256 of the canonical JSON of a normalized config (outputPath excluded)."""
    core = {k: v for k, v in cfg.items() if k != "outputPath"}
    text = json.dumps(core, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# --------------------------------------------------------------------------
# parsing helpers


def parse_matrix(obj):
    """A constant matrix, or a field when the object lists cells."""
    if "cells" in obj:
        return field_from_json(obj)
    return matrix_from_json(obj)


def field_on_domain(obj, dom):
    """Coefficient field aligned with a domain's cells.

    Besides the matrix forms this accepts ``{"kind": "halves", "first": M1,
    "second": M2, "axis": 0}``: M1 on cells with centre coordinate below the
    midpoint of the bounding box along ``axis`` and M2 elsewhere.
    """
    if obj.get("kind") == "halves":
        m1, m2 = matrix_from_json(obj["first"]), matrix_from_json(obj["second"])
        if m1.shape != m2.shape or m1.shape[0] != dom.dim:
            raise ConfigError(f"halves: matrices must be {dom.dim}x{dom.dim}")
        axis = int(obj.get("axis", 0))
        if axis >= dom.dim:
            raise ConfigError("halves/axis: exceeds the domain dimension")
        idx = np.indices(dom.shape)[axis]
        first = idx < dom.shape[axis] // 2
        mats = np.where(first.reshape(-1)[:, None, None], m1, m2)
        return ComplexMatrixField(mats, dom.shape)
    if "cells" in obj:
        return field_from_json(obj, cell_shape=dom.shape)
    return as_field(matrix_from_json(obj, d=dom.dim))


def parse_domain(obj):
    try:
        return build_domain(obj)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"domain: {exc}") from exc


def parse_grid(obj, default=None):
    """A number, a list, or ``{"start", "stop", "num", "spacing"}``."""
    if obj is None:
        return default
    if isinstance(obj, (int, float)):
        return np.array([float(obj)])
    if isinstance(obj, list):
        return np.asarray(obj, dtype=float)
    if obj.get("spacing", "linear") == "log":
        if obj["start"] <= 0:
            raise ConfigError("grid/start: log spacing needs a positive start")
        return np.geomspace(obj["start"], obj["stop"], obj["num"])
    return np.linspace(obj["start"], obj["stop"], obj["num"])


# --------------------------------------------------------------------------
# writers


def to_jsonable(obj):
    """Plain JSON types; nan and inf become strings, arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    return obj


def write_json(path, obj):
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text)
    return Path(path)


def write_csv(path, header, rows):
    """CSV with a header row; floats use repr (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating))
                        else x for x in row])
    return Path(path)


def sha256_file(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunRecord:
    """Config hash, tool version, wall time, verdicts and file manifest.

    ``to_json`` leaves out the wall time so the record file itself is
    deterministic; the time goes to a separate timing file.
    """

    config_hash: str
    version: str
    command: str
    seed: int
    verdicts: dict
    exit_code: int
    manifest: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def to_json(self):
        return {"config_hash": self.config_hash, "version": self.version,
                "command": self.command, "seed": self.seed,
                "verdicts": self.verdicts, "exit_code": self.exit_code,
                "manifest": self.manifest}
