"""Document formats: `.rul` ruling files, control nets, metrics, mesh export.

All structured documents are JSON with a `format` and `version` field. Floats
round-trip exactly (shortest-repr encoding), so parse(write(x)) == x holds
bit-for-bit, and writers emit keys in a fixed order so identical inputs give
byte-identical documents.
"""
from __future__ import annotations

import json
from dataclasses import replace

import numpy as np

from .errors import ValidationError
from .pipelines import PipelineResult
from .splines import SplineCurve
from .surface import (
    Anchor,
    MIN_RULING_LENGTH,
    PlaneChain,
    RuledSurface,
    Ruling,
    RulingSequence,
    eval_surface,
    strip_planarity_defect,
    warp_angle,
)

RUL_FORMAT = "rul"
CONTROL_NET_FORMAT = "control-net"
CURVE_FORMAT = "curve"
METRICS_FORMAT = "metrics"
FORMAT_VERSION = 1

EXPORT_FORMATS = ("control-net", "mesh", "metrics")
DEFAULT_MESH_GRID = (100, 10)
DEFAULT_UNIT = "unitless"


def _loads(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ValidationError("document root must be an object")
    return doc


def _check_header(doc: dict, expected: str) -> None:
    fmt = doc.get("format")
    if fmt != expected:
        raise ValidationError(f"field 'format': expected {expected!r}, got {fmt!r}")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise ValidationError(f"field 'version': unsupported value {version!r}")


def _point(obj, path: str) -> np.ndarray:
    if (not isinstance(obj, list) or len(obj) != 3
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)):
        raise ValidationError(f"field '{path}': expected [x, y, z] numbers")
    return np.array(obj, dtype=float)


def _float_list(obj, path: str) -> list:
    if not isinstance(obj, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj
    ):
        raise ValidationError(f"field '{path}': expected a list of numbers")
    return [float(v) for v in obj]


# --- rulings --------------------------------------------------------------


def rulings_to_obj(rulings: RulingSequence) -> list:
    return [{"q": list(r.q), "p": list(r.p)} for r in rulings]


def rulings_from_obj(items, path: str = "rulings") -> RulingSequence:
    if not isinstance(items, list):
        raise ValidationError(f"field '{path}': expected a list")
    if len(items) < 2:
        raise ValidationError(f"field '{path}': need at least 2 rulings, got {len(items)}")
    rulings = []
    for i, item in enumerate(items):
        if not isinstance(item, dict) or "q" not in item or "p" not in item:
            raise ValidationError(f"field '{path}[{i}]': expected an object with 'q' and 'p'")
        q = _point(item["q"], f"{path}[{i}].q")
        p = _point(item["p"], f"{path}[{i}].p")
        if np.linalg.norm(q - p) <= MIN_RULING_LENGTH:
            raise ValidationError(f"degenerate ruling at index {i}: endpoints coincide")
        rulings.append(Ruling(q, p))
    for i in range(len(rulings) - 1):
        if rulings[i] == rulings[i + 1]:
            raise ValidationError(f"rulings {i} and {i + 1} are identical")
    seq = RulingSequence(tuple(rulings))
    return replace(seq, defects=tuple(strip_planarity_defect(seq)))


def write_rulings(rulings: RulingSequence, unit: str = DEFAULT_UNIT,
                  anchors: PlaneChain = None) -> str:
    doc = {
        "format": RUL_FORMAT,
        "version": FORMAT_VERSION,
        "unit": unit,
        "rulings": rulings_to_obj(rulings),
    }
    if anchors is not None:
        doc["anchors"] = [{"a": list(w.a), "b": list(w.b)} for w in anchors.anchors]
    return json.dumps(doc, indent=2) + "\n"


def parse_rulings(text: str) -> RulingSequence:
    """Rulings from a `.rul` document, with planarity defects attached."""
    doc = _loads(text)
    _check_header(doc, RUL_FORMAT)
    if "rulings" not in doc:
        raise ValidationError("field 'rulings': missing")
    return rulings_from_obj(doc["rulings"])


def parse_rul_document(text: str):
    """Full `.rul` payload: (rulings, plane-chain anchors or None, unit)."""
    doc = _loads(text)
    _check_header(doc, RUL_FORMAT)
    rulings = rulings_from_obj(doc.get("rulings"))
    chain = None
    if "anchors" in doc and doc["anchors"]:
        if not isinstance(doc["anchors"], list):
            raise ValidationError("field 'anchors': expected a list")
        anchors = []
        for i, item in enumerate(doc["anchors"]):
            if not isinstance(item, dict) or "a" not in item or "b" not in item:
                raise ValidationError(f"field 'anchors[{i}]': expected an object with 'a' and 'b'")
            anchors.append(Anchor(_point(item["a"], f"anchors[{i}].a"),
                                  _point(item["b"], f"anchors[{i}].b")))
        chain = PlaneChain(tuple(anchors))
    unit = doc.get("unit", DEFAULT_UNIT)
    if not isinstance(unit, str):
        raise ValidationError("field 'unit': expected a string")
    return rulings, chain, unit


# --- curves and control nets ----------------------------------------------


def curve_to_obj(curve: SplineCurve) -> dict:
    return {
        "degree": curve.degree,
        "knots": list(curve.knots),
        "control_points": [list(row) for row in curve.control_points],
    }


def curve_from_obj(obj, path: str = "curve") -> SplineCurve:
    if not isinstance(obj, dict):
        raise ValidationError(f"field '{path}': expected an object")
    for key in ("degree", "knots", "control_points"):
        if key not in obj:
            raise ValidationError(f"field '{path}.{key}': missing")
    degree = obj["degree"]
    if not isinstance(degree, int) or isinstance(degree, bool):
        raise ValidationError(f"field '{path}.degree': expected an integer")
    knots = _float_list(obj["knots"], f"{path}.knots")
    cps_obj = obj["control_points"]
    if not isinstance(cps_obj, list):
        raise ValidationError(f"field '{path}.control_points': expected a list")
    cps = [_point(row, f"{path}.control_points[{i}]") for i, row in enumerate(cps_obj)]
    try:
        return SplineCurve(degree, np.array(knots), np.array(cps))
    except ValidationError as exc:
        raise ValidationError(f"field '{path}': {exc}") from exc


def write_curve(curve: SplineCurve) -> str:
    doc = {"format": CURVE_FORMAT, "version": FORMAT_VERSION, "curve": curve_to_obj(curve)}
    return json.dumps(doc, indent=2) + "\n"


def parse_curve(text: str) -> SplineCurve:
    doc = _loads(text)
    _check_header(doc, CURVE_FORMAT)
    return curve_from_obj(doc.get("curve"))


def write_control_net(surface: RuledSurface, initial: RuledSurface = None) -> str:
    doc = {
        "format": CONTROL_NET_FORMAT,
        "version": FORMAT_VERSION,
        "curves": {"c0": curve_to_obj(surface.c0), "c1": curve_to_obj(surface.c1)},
    }
    if initial is not None:
        doc["initial_curves"] = {
            "c0": curve_to_obj(initial.c0),
            "c1": curve_to_obj(initial.c1),
        }
    return json.dumps(doc, indent=2) + "\n"


def parse_control_net(text: str) -> RuledSurface:
    doc = _loads(text)
    _check_header(doc, CONTROL_NET_FORMAT)
    curves = doc.get("curves")
    if not isinstance(curves, dict) or "c0" not in curves or "c1" not in curves:
        raise ValidationError("field 'curves': expected an object with 'c0' and 'c1'")
    return RuledSurface(curve_from_obj(curves["c0"], "curves.c0"),
                        curve_from_obj(curves["c1"], "curves.c1"))


# --- metrics and mesh -----------------------------------------------------


def metrics_to_obj(result: PipelineResult, mode: str) -> dict:
    m = result.metrics
    return {
        "format": METRICS_FORMAT,
        "version": FORMAT_VERSION,
        "mode": mode,
        "beta_max": m.beta_max,
        "beta_avg": m.beta_avg,
        "d_max": m.d_max,
        "d_avg": m.d_avg,
        "sample_count": m.sample_count,
        "defects": list(m.defects),
        "scale": result.scale,
        "closeness_residual": result.closeness_residual,
        "termination": result.termination,
        "outer_iterations": result.outer_iterations,
        "outer_trace": [
            {"beta_max": it.beta_max, "beta_avg": it.beta_avg, "objective": it.objective}
            for it in result.outer_trace
        ],
    }


def write_metrics(result: PipelineResult, mode: str) -> str:
    return json.dumps(metrics_to_obj(result, mode), indent=2) + "\n"


def parse_metrics(text: str) -> dict:
    doc = _loads(text)
    _check_header(doc, METRICS_FORMAT)
    return doc


def _warp_per_sample(surface: RuledSurface, params: np.ndarray) -> np.ndarray:
    values = np.full(len(params), np.nan)
    for i, t in enumerate(params):
        try:
            values[i] = warp_angle(surface, t)
        except Exception:
            continue
    if np.all(np.isnan(values)):
        return np.zeros(len(params))
    good = np.flatnonzero(~np.isnan(values))
    for i in np.flatnonzero(np.isnan(values)):
        values[i] = values[good[np.argmin(np.abs(good - i))]]
    return values


def export_mesh(surface: RuledSurface, grid=DEFAULT_MESH_GRID) -> str:
    """ASCII PLY tessellation with a per-vertex warp-angle scalar (degrees)."""
    nt, ns = grid
    if nt < 1 or ns < 1:
        raise ValidationError("mesh grid must be at least 1x1")
    ts = np.linspace(0.0, 1.0, nt + 1)
    ss = np.linspace(0.0, 1.0, ns + 1)
    warp = _warp_per_sample(surface, ts)

    lines = [
        "ply",
        "format ascii 1.0",
        "comment ruled surface tessellation; warp_angle in degrees",
        f"element vertex {(nt + 1) * (ns + 1)}",
        "property float x",
        "property float y",
        "property float z",
        "property float warp_angle",
        f"element face {nt * ns}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    for i, t in enumerate(ts):
        w = float(warp[i])
        for s in ss:
            x, y, z = (float(v) for v in eval_surface(surface, t, s))
            lines.append(f"{x!r} {y!r} {z!r} {w!r}")
    for i in range(nt):
        for j in range(ns):
            v = i * (ns + 1) + j
            lines.append(f"4 {v} {v + 1} {v + ns + 2} {v + ns + 1}")
    return "\n".join(lines) + "\n"


def export_result(result: PipelineResult, formats, mode: str,
                  mesh_grid=DEFAULT_MESH_GRID) -> dict:
    """Requested export documents for a pipeline result, keyed by format name."""
    formats = tuple(formats)
    unknown = [f for f in formats if f not in EXPORT_FORMATS]
    if unknown:
        raise ValidationError(f"unknown export formats {unknown}; expected {EXPORT_FORMATS}")
    out = {}
    if "metrics" in formats:
        out["metrics"] = write_metrics(result, mode)
    if "control-net" in formats:
        out["control-net"] = write_control_net(result.surface, result.initial_surface)
    if "mesh" in formats:
        out["mesh"] = export_mesh(result.surface, mesh_grid)
    return out
