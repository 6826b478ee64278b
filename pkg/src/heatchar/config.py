"""JSON run configuration: schema, strict validation and object builders."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import jsonschema
import numpy as np

from . import spectral
from .errors import ConfigError
from .tensors import (CURVATURE_TOL, CurvatureTensor, FixedPointGerm, NormalIsometry,
                      TorsionData, block_rotation, to_internal)

COMMANDS = ("coeff", "oracle", "verify", "gbf")
OUTPUTS = ("table", "json", "csv")
MODELS = ("sphere_functions", "sphere_oneforms_bochner", "sphere_hodge", "torus_isometry",
          "torus_torsion", "synthetic")

_number = {"type": "number"}
_int = {"type": "integer"}
_matrix = {"type": "array", "items": {"type": "array", "items": _number}}
_entries = {"type": "array", "items": {"type": "array", "items": _number}}

SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "heatchar run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "output": {"enum": list(OUTPUTS)},
        "germ": {
            "type": "object",
            "additionalProperties": False,
            "required": ["d"],
            "properties": {
                "d": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 0},
                "p": {"type": "integer", "minimum": 0},
                "p_range": {"type": "array", "items": _int, "minItems": 2, "maxItems": 2},
                "A": _matrix,
                "rotation_angles": {"type": "array", "items": _number, "minItems": 1},
                "curvature": {
                    "oneOf": [
                        {"enum": ["flat", "sphere2"]},
                        {"type": "object", "additionalProperties": False,
                         "properties": {"constant": _number, "components": _entries}},
                    ]
                },
                "torsion": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"Tbar": _entries, "dTbar": _entries,
                                   "Q_dense": {"type": "array"}, "dQ_dense": {"type": "array"}},
                },
            },
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"enum": list(MODELS)},
                "theta": _number,
                "p": {"type": "integer", "minimum": 0},
                "d": {"type": "integer", "minimum": 1},
                "R": _matrix,
                "v": {"type": "array", "items": _number},
                "Q": {"type": "array"},
                "coefficients": {"type": "array", "items": _number, "minItems": 1},
                "n_N": {"type": "integer", "minimum": 0},
            },
        },
        "fit": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t0": {"type": "number", "exclusiveMinimum": 0},
                "q": {"type": "number", "exclusiveMinimum": 1},
                "samples": {"type": "integer", "minimum": 2},
                "K": {"type": "integer", "minimum": 0, "maximum": 3},
                "eps": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "gbf": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "pairs": {"type": "array",
                          "items": {"type": "array", "items": _number,
                                    "minItems": 2, "maxItems": 2}},
                "l": {"type": "array", "items": _number},
            },
        },
        "verify": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"only": {"type": "array", "items": {"type": "string"}}},
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"curvature": {"type": "number", "exclusiveMinimum": 0}},
        },
    },
}


@dataclass(frozen=True)
class FitParams:
    t0: float = spectral.DEFAULT_T0
    q: float = spectral.DEFAULT_Q
    samples: int = spectral.DEFAULT_SAMPLES
    K: int = spectral.DEFAULT_K
    eps: float = spectral.DEFAULT_EPS


@dataclass(frozen=True)
class RunConfig:
    command: str
    output: str = "table"
    germ: dict | None = None
    model: dict | None = None
    fit: FitParams = field(default_factory=FitParams)
    gbf: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)
    curvature_tol: float = CURVATURE_TOL


def validate(raw: Any) -> None:
    """Schema check; every violation is reported as :class:`ConfigError`."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(str(x) for x in e.absolute_path) or "<root>"
            msgs.append(f"{where}: {e.message}")
        raise ConfigError("invalid configuration: " + "; ".join(msgs))


def load(text: str | None, command: str | None = None, output: str | None = None,
         tol: float | None = None) -> RunConfig:
    """Parse and validate config text; command-line overrides win over file values."""
    if text is None:
        raw: dict = {}
    else:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    validate(raw)
    cmd = command or raw.get("command")
    if cmd is None:
        raise ConfigError("no command given (set 'command' in the config or pass --command)")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}; choose from {list(COMMANDS)}")
    tol_value = tol if tol is not None else raw.get("tolerances", {}).get("curvature",
                                                                          CURVATURE_TOL)
    if not tol_value > 0:
        raise ConfigError(f"tolerance must be positive, got {tol_value}")
    cfg = RunConfig(cmd, output or raw.get("output", "table"), raw.get("germ"),
                    raw.get("model"), FitParams(**raw.get("fit", {})), raw.get("gbf", {}),
                    raw.get("verify", {}), float(tol_value))
    if cmd == "coeff" and cfg.germ is None:
        raise ConfigError("command 'coeff' needs a 'germ' section")
    if cmd in ("oracle", "gbf") and cfg.model is None:
        raise ConfigError(f"command {cmd!r} needs a 'model' section")
    return cfg


# --------------------------------------------------------------------------
# builders
# --------------------------------------------------------------------------

def _normal_matrix(spec: dict, m: int) -> np.ndarray:
    has_A, has_angles = "A" in spec, "rotation_angles" in spec
    if has_A == has_angles:
        raise ConfigError("germ needs exactly one of 'A' or 'rotation_angles'")
    if has_angles:
        A = block_rotation(spec["rotation_angles"])
    else:
        A = np.asarray(spec["A"], dtype=float)
    if A.shape != (m, m):
        raise ConfigError(f"normal matrix has shape {A.shape}, expected ({m}, {m}) for d - n = {m}")
    return A


def _curvature(spec, d: int, tol: float) -> CurvatureTensor:
    if spec is None or spec == "flat":
        return CurvatureTensor.zeros(d)
    if spec == "sphere2":
        if d != 2:
            raise ConfigError(f"curvature preset 'sphere2' needs d = 2, got d = {d}")
        return CurvatureTensor.unit_sphere2()
    if "constant" in spec and "components" in spec:
        raise ConfigError("curvature takes 'constant' or 'components', not both")
    if "constant" in spec:
        return CurvatureTensor.constant(d, spec["constant"])
    entries = []
    for row in spec.get("components", []):
        if len(row) != 5:
            raise ConfigError(f"curvature component needs [a, b, c, e, value], got {row}")
        entries.append((*(_index(x) for x in row[:4]), float(row[4])))
    return CurvatureTensor.from_components(d, entries, tol=tol)


def _index(x) -> int:
    if float(x) != int(x):
        raise ConfigError(f"index {x} is not an integer")
    return int(x)


def _sparse(entries, d: int, rank: int, what: str) -> np.ndarray:
    """Fill a rank-``rank`` array from 1-based entries, completing skewness in slots 0 and 1."""
    out = np.zeros((d,) * rank)
    for row in entries:
        if len(row) != rank + 1:
            raise ConfigError(f"{what} entry needs {rank} indices and a value, got {row}")
        idx = [to_internal(_index(x)) for x in row[:rank]]
        if max(idx) >= d:
            raise ConfigError(f"{what} index {row[:rank]} exceeds dimension {d}")
        if idx[0] == idx[1]:
            raise ConfigError(f"{what} is skew in its first two slots; diagonal entry {row[:rank]}")
        out[tuple(idx)] = row[rank]
        swapped = [idx[1], idx[0], *idx[2:]]
        out[tuple(swapped)] = -row[rank]
    return out


def _torsion(spec, d: int) -> TorsionData | None:
    if spec is None:
        return None
    dense = "Q_dense" in spec or "dQ_dense" in spec
    sparse = "Tbar" in spec or "dTbar" in spec
    if dense and sparse:
        raise ConfigError("torsion takes sparse Tbar/dTbar or dense Q_dense/dQ_dense, not both")
    if dense:
        Q = np.asarray(spec.get("Q_dense", np.zeros((d,) * 3)), dtype=float)
        dQ = np.asarray(spec.get("dQ_dense", np.zeros((d,) * 4)), dtype=float)
        if Q.shape != (d,) * 3 or dQ.shape != (d,) * 4:
            raise ConfigError(f"dense torsion shapes {Q.shape}, {dQ.shape} do not match d = {d}")
        return TorsionData.from_contorsion(Q, dQ)
    return TorsionData.from_tbar(_sparse(spec.get("Tbar", []), d, 3, "Tbar"),
                                 _sparse(spec.get("dTbar", []), d, 4, "dTbar"))


def degrees(spec: dict) -> list[int]:
    d = spec["d"]
    if "p" in spec and "p_range" in spec:
        raise ConfigError("germ takes 'p' or 'p_range', not both")
    if "p_range" in spec:
        lo, hi = spec["p_range"]
        if not 0 <= lo <= hi <= d:
            raise ConfigError(f"p_range {spec['p_range']} must satisfy 0 <= lo <= hi <= d = {d}")
        return list(range(lo, hi + 1))
    p = spec.get("p", 0)
    if p > d:
        raise ConfigError(f"p = {p} exceeds d = {d}")
    return [p]


def build_germs(spec: dict, tol: float = CURVATURE_TOL) -> list[FixedPointGerm]:
    """One germ per requested degree; validation errors from the library propagate."""
    d, n = spec["d"], spec.get("n", 0)
    if not 0 <= n < d:
        raise ConfigError(f"need 0 <= n < d, got n = {n}, d = {d}")
    A = _normal_matrix(spec, d - n)
    iso = NormalIsometry(A)
    R = _curvature(spec.get("curvature"), d, tol)
    tor = _torsion(spec.get("torsion"), d)
    return [FixedPointGerm(d, n, p, iso, R, tor) for p in degrees(spec)]


def _require(spec: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in spec]
    if missing:
        raise ConfigError(f"model {spec['name']!r} needs {missing}")


def build_model(spec: dict) -> spectral.SpectralModel:
    name = spec["name"]
    if name == "sphere_functions":
        _require(spec, "theta")
        return spectral.sphere_rotation_functions(spec["theta"])
    if name == "sphere_oneforms_bochner":
        _require(spec, "theta")
        return spectral.sphere_rotation_oneforms_bochner(spec["theta"])
    if name == "sphere_hodge":
        _require(spec, "theta", "p")
        return spectral.sphere_rotation_hodge(spec["theta"], spec["p"])
    if name == "torus_isometry":
        _require(spec, "R")
        d = len(spec["R"])
        return spectral.torus_lattice_isometry(d, spec["R"], spec.get("v"), spec.get("p", 0))
    if name == "torus_torsion":
        _require(spec, "R", "Q")
        d = len(spec["R"])
        return spectral.torus_constant_torsion(d, spec["R"], spec["Q"], spec.get("p", 0),
                                               spec.get("v"))
    _require(spec, "coefficients")
    return spectral.synthetic_model(spec["coefficients"], spec.get("n_N", 0))


def angle_from(spec: dict) -> float:
    if "theta" not in spec:
        raise ConfigError(f"model {spec['name']!r} needs 'theta'")
    theta = float(spec["theta"])
    if not math.isfinite(theta):
        raise ConfigError("theta must be finite")
    return theta
