"""Clamped B-spline curves: evaluation, interpolation, parametrization, projection.

All curves live on the parameter interval [0, 1] with clamped knot vectors, so
the first/last control points are interpolated exactly. Values are immutable
after construction and safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, DomainError, SingularSystemError, ValidationError

# Provenance labels for data parametrizations.
CENTRIPETAL_AVERAGE = "centripetal-average"
FOOTPOINT_AVERAGE = "foot-point-average"

# Monotonicity repair: a colliding parameter is bumped past its predecessor by
# this much, then the sequence is rescaled back onto [0, 1].
MONOTONE_EPS = 1e-6

_FOOT_SCAN_POINTS = 64
_FOOT_NEWTON_MAX_ITER = 32
_FOOT_NEWTON_TOL = 1e-10


def _as_point_array(points, name="points") -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError(f"{name} must be an (n, 3) array, got shape {arr.shape}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class SplineCurve:
    """Clamped B-spline curve of a given degree over [0, 1]."""

    degree: int
    knots: np.ndarray
    control_points: np.ndarray

    def __post_init__(self):
        if self.degree < 1:
            raise ValidationError(f"degree must be >= 1, got {self.degree}")
        knots = np.asarray(self.knots, dtype=float)
        cps = _as_point_array(self.control_points, "control_points")
        p = self.degree
        if len(cps) < p + 1:
            raise ValidationError(
                f"need at least {p + 1} control points for degree {p}, got {len(cps)}"
            )
        if len(knots) != len(cps) + p + 1:
            raise ValidationError(
                f"knot count {len(knots)} != control points {len(cps)} + degree {p} + 1"
            )
        if np.any(np.diff(knots) < 0):
            raise ValidationError("knots must be nondecreasing")
        if not (np.all(knots[: p + 1] == 0.0) and np.all(knots[-(p + 1):] == 1.0)):
            raise ValidationError("knot vector must be clamped to [0, 1]")
        object.__setattr__(self, "knots", _freeze(knots))
        object.__setattr__(self, "control_points", _freeze(cps))

    @property
    def n_ctrl(self) -> int:
        return len(self.control_points)

    def with_control_points(self, control_points) -> "SplineCurve":
        return SplineCurve(self.degree, self.knots, control_points)

    def __eq__(self, other):
        if not isinstance(other, SplineCurve):
            return NotImplemented
        return (
            self.degree == other.degree
            and np.array_equal(self.knots, other.knots)
            and np.array_equal(self.control_points, other.control_points)
        )


@dataclass(frozen=True, eq=False)
class Parametrization:
    """Strictly increasing data parameters on [0, 1] with per-entry provenance."""

    params: np.ndarray
    provenance: tuple

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        if params.ndim != 1 or len(params) < 2:
            raise ValidationError("parametrization needs at least two values")
        if params[0] != 0.0 or params[-1] != 1.0:
            raise ValidationError("parametrization endpoints must be 0 and 1")
        if np.any(np.diff(params) <= 0):
            raise ValidationError("parametrization must be strictly increasing")
        prov = tuple(self.provenance)
        if len(prov) != len(params):
            raise ValidationError("provenance must have one label per parameter")
        object.__setattr__(self, "params", _freeze(params))
        object.__setattr__(self, "provenance", prov)

    def __len__(self):
        return len(self.params)

    def __eq__(self, other):
        if not isinstance(other, Parametrization):
            return NotImplemented
        return np.array_equal(self.params, other.params) and self.provenance == other.provenance


def uniform_clamped_knots(n_ctrl: int, degree: int) -> np.ndarray:
    """Clamped knot vector on [0, 1] with uniformly spaced interior knots."""
    if n_ctrl < degree + 1:
        raise ValidationError(f"need at least {degree + 1} control points, got {n_ctrl}")
    interior = n_ctrl - degree - 1
    inner = np.arange(1, interior + 1) / (interior + 1)
    return np.concatenate([np.zeros(degree + 1), inner, np.ones(degree + 1)])


def averaged_knots(params: np.ndarray, degree: int) -> np.ndarray:
    """Interpolation knots: each interior knot averages `degree` consecutive params."""
    t = np.asarray(params, dtype=float)
    n = len(t) - 1
    p = degree
    inner = np.array([t[j:j + p].mean() for j in range(1, n - p + 1)])
    return np.concatenate([np.zeros(p + 1), inner, np.ones(p + 1)])


def greville_abscissae(knots: np.ndarray, degree: int) -> np.ndarray:
    """Greville parameters: averages of `degree` consecutive interior knots."""
    n_ctrl = len(knots) - degree - 1
    return np.array([knots[i + 1:i + degree + 1].mean() for i in range(n_ctrl)])


def line_curve(a, b, n_ctrl: int = 4, degree: int = 3) -> SplineCurve:
    """Curve tracing the segment a->b with exactly linear parametrization."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    knots = uniform_clamped_knots(n_ctrl, degree)
    xi = greville_abscissae(knots, degree)
    cps = a[None, :] + xi[:, None] * (b - a)[None, :]
    return SplineCurve(degree, knots, cps)


def find_span(knots: np.ndarray, degree: int, n_ctrl: int, t: float) -> int:
    """Index k with knots[k] <= t < knots[k+1]; t = 1 maps to the last span."""
    if t >= knots[n_ctrl]:
        return n_ctrl - 1
    return int(np.searchsorted(knots, t, side="right")) - 1


def basis_with_derivatives(knots: np.ndarray, degree: int, span: int, t: float,
                           order: int) -> np.ndarray:
    """Nonzero basis functions and derivatives at t.

    Returns an (order+1, degree+1) array whose row j holds the j-th derivative
    of basis functions span-degree .. span.
    """
    p = degree
    ndu = np.empty((p + 1, p + 1))
    ndu[0, 0] = 1.0
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    for j in range(1, p + 1):
        left[j] = t - knots[span + 1 - j]
        right[j] = knots[span + j] - t
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((order + 1, p + 1))
    ders[0, :] = ndu[:, p]
    a = np.empty((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, order + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1

    factor = float(p)
    for k in range(1, order + 1):
        ders[k, :] *= factor
        factor *= p - k
    return ders


def design_matrix(knots: np.ndarray, degree: int, n_ctrl: int, params,
                  order: int = 0) -> np.ndarray:
    """Dense matrix of the order-th basis derivatives at the given parameters."""
    params = np.atleast_1d(np.asarray(params, dtype=float))
    out = np.zeros((len(params), n_ctrl))
    for row, t in enumerate(params):
        span = find_span(knots, degree, n_ctrl, t)
        ders = basis_with_derivatives(knots, degree, span, t, order)
        out[row, span - degree:span + 1] = ders[order]
    return out


def evaluate_curve(curve: SplineCurve, t: float, order: int = 0) -> np.ndarray:
    """Point (order 0) or order-th derivative vector of the curve at t."""
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"parameter {t} outside [0, 1]")
    if not 0 <= order <= curve.degree:
        raise DomainError(f"derivative order {order} not in 0..{curve.degree}")
    span = find_span(curve.knots, curve.degree, curve.n_ctrl, t)
    ders = basis_with_derivatives(curve.knots, curve.degree, span, t, order)
    window = curve.control_points[span - curve.degree:span + 1]
    return ders[order] @ window


def evaluate_many(curve: SplineCurve, params, order: int = 0) -> np.ndarray:
    """Vectorized evaluation over a parameter sequence; returns (n, 3)."""
    mat = design_matrix(curve.knots, curve.degree, curve.n_ctrl, params, order)
    return mat @ curve.control_points


def _derivatives_up_to(curve: SplineCurve, t: float, upto: int):
    """Position plus derivatives up to `upto`, zero-padded past the degree."""
    order = min(upto, curve.degree)
    span = find_span(curve.knots, curve.degree, curve.n_ctrl, t)
    ders = basis_with_derivatives(curve.knots, curve.degree, span, t, order)
    window = curve.control_points[span - curve.degree:span + 1]
    rows = [ders[k] @ window for k in range(order + 1)]
    rows += [np.zeros(3)] * (upto - order)
    return rows


def centripetal_params(points) -> Parametrization:
    """Parameters with increments proportional to square roots of chord lengths."""
    pts = _as_point_array(points)
    if len(pts) < 2:
        raise ValidationError("need at least two points")
    chords = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    zero = np.flatnonzero(chords == 0.0)
    if len(zero):
        raise DegenerateGeometryError(
            f"coincident consecutive points at indices {[int(i) for i in zero]}"
        )
    steps = np.sqrt(chords)
    t = np.concatenate([[0.0], np.cumsum(steps)]) / steps.sum()
    t[-1] = 1.0
    return Parametrization(t, (CENTRIPETAL_AVERAGE,) * len(t))


def repair_monotone(params: np.ndarray) -> np.ndarray:
    """Force strict monotonicity and rescale so the sequence ends at 1."""
    t = np.array(params, dtype=float)
    t[0] = 0.0
    for i in range(1, len(t)):
        if t[i] <= t[i - 1]:
            t[i] = t[i - 1] + MONOTONE_EPS
    if t[-1] != 1.0:
        t /= t[-1]
    return t


def average_ruling_params(u, v) -> Parametrization:
    """Per-ruling mean of the two endpoint parametrizations, repaired to monotone.

    Accepts Parametrization values or raw sequences; raw sequences may be
    non-monotone (foot-point collisions) and are repaired after averaging.
    """
    up = u.params if isinstance(u, Parametrization) else np.asarray(u, dtype=float)
    vp = v.params if isinstance(v, Parametrization) else np.asarray(v, dtype=float)
    if len(up) != len(vp):
        raise ValidationError(f"parametrization lengths differ: {len(up)} vs {len(vp)}")
    t = repair_monotone(0.5 * (up + vp))
    prov_u = u.provenance if isinstance(u, Parametrization) else (FOOTPOINT_AVERAGE,) * len(up)
    prov_v = v.provenance if isinstance(v, Parametrization) else (FOOTPOINT_AVERAGE,) * len(vp)
    prov = tuple(a if a == b else FOOTPOINT_AVERAGE for a, b in zip(prov_u, prov_v))
    return Parametrization(t, prov)


def interpolate(points, params, degree: int = 3) -> SplineCurve:
    """Curve through the data points at the given parameters (averaged knots)."""
    pts = _as_point_array(points)
    t = params.params if isinstance(params, Parametrization) else np.asarray(params, dtype=float)
    if len(pts) != len(t):
        raise ValidationError(f"{len(pts)} points but {len(t)} parameters")
    if len(pts) < degree + 1:
        raise ValidationError(
            f"need at least {degree + 1} points for degree {degree}, got {len(pts)}"
        )
    bad = np.flatnonzero(np.diff(t) <= 0)
    if len(bad):
        raise SingularSystemError(
            f"parameters not strictly increasing at indices {[int(i) + 1 for i in bad]}",
            indices=[int(i) + 1 for i in bad],
        )
    knots = averaged_knots(t, degree)
    coll = design_matrix(knots, degree, len(pts), t)
    try:
        cps = np.linalg.solve(coll, pts)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"singular collocation matrix: {exc}") from exc
    # Clamped ends interpolate exactly; pin them to kill solver round-off.
    cps[0] = pts[0]
    cps[-1] = pts[-1]
    return SplineCurve(degree, knots, cps)


def _newton_foot(curve: SplineCurve, point: np.ndarray, t0: float):
    """Newton iteration on (C(t)-P).C'(t); returns None when it stalls or escapes."""
    t = t0
    for _ in range(_FOOT_NEWTON_MAX_ITER):
        c, d1, d2 = _derivatives_up_to(curve, t, 2)
        diff = c - point
        g = diff @ d1
        dg = d1 @ d1 + diff @ d2
        if dg <= 1e-14:
            return None
        t_next = t - g / dg
        if not 0.0 <= t_next <= 1.0:
            return None
        if abs(t_next - t) < _FOOT_NEWTON_TOL:
            return t_next
        t = t_next
    return t


def _bisect_foot(curve: SplineCurve, point: np.ndarray, lo: float, hi: float):
    """Bisection on the distance derivative inside a scan bracket."""

    def g(t):
        c, d1 = _derivatives_up_to(curve, t, 1)
        return (c - point) @ d1

    glo, ghi = g(lo), g(hi)
    if glo > 0 or ghi < 0:
        return None
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def foot_point(curve: SplineCurve, point, t_init: float = 0.5) -> float:
    """Parameter of a locally nearest point on the curve.

    A 64-point uniform scan seeds and brackets the search; the result is never
    worse than the best scan sample.
    """
    if not 0.0 <= t_init <= 1.0:
        raise DomainError(f"t_init {t_init} outside [0, 1]")
    p = np.asarray(point, dtype=float)

    scan_t = np.linspace(0.0, 1.0, _FOOT_SCAN_POINTS)
    scan_pts = evaluate_many(curve, scan_t)
    dists = np.linalg.norm(scan_pts - p[None, :], axis=1)
    j = int(np.argmin(dists))

    candidates = [scan_t[j], 0.0, 1.0]
    newton_init = _newton_foot(curve, p, t_init)
    if newton_init is not None:
        candidates.append(newton_init)
    if newton_init is None or abs(newton_init - scan_t[j]) > 1.0 / _FOOT_SCAN_POINTS:
        newton_scan = _newton_foot(curve, p, scan_t[j])
        if newton_scan is not None:
            candidates.append(newton_scan)
    lo = scan_t[max(j - 1, 0)]
    hi = scan_t[min(j + 1, _FOOT_SCAN_POINTS - 1)]
    bisected = _bisect_foot(curve, p, lo, hi)
    if bisected is not None:
        candidates.append(bisected)

    best = min(candidates, key=lambda t: float(np.linalg.norm(evaluate_curve(curve, t) - p)))
    return float(min(max(best, 0.0), 1.0))
