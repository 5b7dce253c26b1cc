"""JSON encoding of spaces, measures, reports and certificates.

Exact rationals are written as integers when integral and as ``"p/q"``
strings otherwise; floats stay JSON numbers.  Reading accepts the same
forms, so every report round-trips through the library.
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bounds import BoundCertificate
from .errors import DomainError, InputFileError, InvalidParameters, NonPositiveWeight
from .families import generate
from .measures import CmuReport, Measure, RatioProfile
from .metric import FiniteMetricSpace, parse_rational, validate_metric
from .optimizer import Infeasible, OptimizationResult

MODES = ("auto", "exact", "float")


def scalar(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def to_jsonable(obj):
    """Recursively convert library objects into JSON-compatible values."""
    if isinstance(obj, FiniteMetricSpace):
        return space_to_dict(obj)
    if isinstance(obj, Measure):
        return {"weights": [scalar(w) for w in obj.weights]}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    return scalar(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2)


def space_to_dict(space: FiniteMetricSpace) -> dict:
    return {
        "points": list(space.points),
        "distances": [[scalar(d) for d in row] for row in space.distance_matrix()],
        "mode": space.mode,
    }


def _entry(value):
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"distance entries must be numbers or 'p/q' strings, got {value!r}")
    return value


def space_from_dict(data: dict, mode: str = "auto") -> FiniteMetricSpace:
    """A metric from ``{"points", "distances"}`` or a family spec ``{"kind", ...}``.

    ``mode`` ``"auto"`` picks exact arithmetic when every entry is an integer
    or a ``p/q`` string; ``"exact"`` also reads decimal floats exactly.
    """
    if mode not in MODES:
        raise InvalidParameters(f"mode must be one of {MODES}, got {mode!r}")
    if not isinstance(data, dict):
        raise InvalidParameters("space JSON must be an object")
    if "kind" in data:
        space = generate(data)
        return convert_mode(space, mode)
    if "distances" not in data:
        raise InvalidParameters("space JSON needs a 'distances' matrix")
    rows = data["distances"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InvalidParameters("'distances' must be a list of rows")
    matrix = [[_entry(v) for v in row] for row in rows]
    exact = {"auto": None, "exact": True, "float": False}[mode]
    return validate_metric(matrix, data.get("points"), exact=exact)


def convert_mode(space: FiniteMetricSpace, mode: str) -> FiniteMetricSpace:
    if mode == "auto" or (mode == "exact") == space.exact:
        return space
    if mode == "float":
        return validate_metric([[float(d) for d in row] for row in space.distance_matrix()], space.points, exact=False)
    return validate_metric(space.distance_matrix(), space.points, exact=True)


def load_space(path, mode: str = "auto") -> FiniteMetricSpace:
    return space_from_dict(_read_json(path), mode)


def measure_from_json(data) -> Measure:
    if isinstance(data, dict):
        data = data.get("weights")
    if not isinstance(data, list):
        raise NonPositiveWeight("measure JSON must be a list of weights or {\"weights\": [...]}")
    return Measure(tuple(data))


def load_measure(spec: str, n: int) -> Measure:
    """``"counting"``, ``"uniform"`` or a path to a measure JSON file."""
    if spec == "counting":
        return Measure.counting(n)
    if spec == "uniform":
        return Measure.uniform(n)
    return measure_from_json(_read_json(spec))


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFileError(f"{path} is not valid JSON: {exc}") from None


def cmu_report_dict(space: FiniteMetricSpace, report: CmuReport) -> dict:
    return {
        "value": scalar(report.value),
        "witnesses": [
            {
                "center": w.center,
                "center_label": space.points[w.center],
                "radius": scalar(w.radius),
                "numerator_ball": list(w.numerator_members),
                "denominator_ball": list(w.denominator_members),
            }
            for w in report.witnesses
        ],
        "normalized_measure": [scalar(w) for w in report.normalized_measure.weights],
    }


def profile_dict(profile: RatioProfile) -> dict:
    return {
        "center": profile.center,
        "entries": [{"radius": scalar(r), "ratio": scalar(q)} for r, q in profile.entries],
    }


def optimization_dict(result: OptimizationResult) -> dict:
    return {
        "lower": scalar(result.lower),
        "upper": scalar(result.upper),
        "lower_float": float(result.lower),
        "upper_float": float(result.upper),
        "witness": {"weights": [scalar(w) for w in result.witness_measure.weights]},
        "binding_pairs": [[c, scalar(r)] for c, r in result.binding_pairs],
        "dual_certificate": [[c, scalar(r), scalar(y)] for c, r, y in result.dual_certificate],
        "iterations": result.iterations,
        "tolerance": result.tolerance,
    }


def infeasible_dict(verdict: Infeasible) -> dict:
    return {
        "feasible": False,
        "level": scalar(verdict.level),
        "bound": scalar(verdict.bound),
        "certificate": [[c, scalar(r), scalar(y)] for c, r, y in verdict.certificate],
    }


def certificate_dict(cert: BoundCertificate) -> dict:
    return {
        "kind": cert.kind,
        "value": scalar(cert.value),
        "value_float": float(cert.value),
        "applies_to": cert.applies_to,
        "witness": to_jsonable(cert.witness),
        "replay": to_jsonable(cert.replay),
    }


def _parse(value):
    return parse_rational(value) if isinstance(value, str) else value


def certificate_from_dict(data: dict) -> BoundCertificate:
    witness = {k: _parse(v) if k in ("r", "s", "theta", "distance") else v for k, v in data["witness"].items()}
    return BoundCertificate(
        kind=data["kind"],
        value=_parse(data["value"]),
        witness=witness,
        applies_to=data["applies_to"],
        replay=data.get("replay", {}),
    )


__all__ = [
    "certificate_dict",
    "certificate_from_dict",
    "cmu_report_dict",
    "convert_mode",
    "dumps",
    "infeasible_dict",
    "load_measure",
    "load_space",
    "measure_from_json",
    "optimization_dict",
    "profile_dict",
    "scalar",
    "space_from_dict",
    "space_to_dict",
    "to_jsonable",
]
