"""Ruled surfaces: evaluation, normals, warp-angle metrics, planar-strip tools."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, DomainError, ValidationError
from .splines import SplineCurve, _derivatives_up_to, evaluate_curve, foot_point

MIN_RULING_LENGTH = 1e-9
NORMAL_EPS = 1e-12
ANCHOR_ON_RULING_TOL = 1e-9
DEFAULT_SNAP_TOL = 1e-6
DEFAULT_METRIC_SAMPLES = 100


def _vec3(x, name="point") -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValidationError(f"{name} must be a 3D point, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Ruling:
    """Straight segment from Q (on the c0 side) to P (on the c1 side)."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _vec3(self.q, "q")
        p = _vec3(self.p, "p")
        if np.linalg.norm(q - p) <= MIN_RULING_LENGTH:
            raise ValidationError("degenerate ruling: endpoints coincide")
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def direction(self) -> np.ndarray:
        d = self.p - self.q
        return d / np.linalg.norm(d)

    def __eq__(self, other):
        if not isinstance(other, Ruling):
            return NotImplemented
        return np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p)


@dataclass(frozen=True, eq=False)
class RulingSequence:
    """Ordered control rulings L_0..L_K; `defects` carries parse diagnostics."""

    rulings: tuple
    defects: tuple = field(default=None, compare=False)

    def __post_init__(self):
        rulings = tuple(self.rulings)
        if len(rulings) < 2:
            raise ValidationError(f"need at least 2 rulings, got {len(rulings)}")
        for i in range(len(rulings) - 1):
            if rulings[i] == rulings[i + 1]:
                raise ValidationError(f"rulings {i} and {i + 1} are identical")
        object.__setattr__(self, "rulings", rulings)

    def __len__(self):
        return len(self.rulings)

    def __iter__(self):
        return iter(self.rulings)

    def __getitem__(self, i):
        return self.rulings[i]

    @property
    def segment_count(self) -> int:
        """K: index of the last ruling."""
        return len(self.rulings) - 1

    @property
    def q_points(self) -> np.ndarray:
        return np.array([r.q for r in self.rulings])

    @property
    def p_points(self) -> np.ndarray:
        return np.array([r.p for r in self.rulings])

    def __eq__(self, other):
        if not isinstance(other, RulingSequence):
            return NotImplemented
        return self.rulings == other.rulings


@dataclass(frozen=True, eq=False)
class RuledSurface:
    """Surface blending two boundary curves: S(t,s) = c0(t)(1-s) + c1(t)s."""

    c0: SplineCurve
    c1: SplineCurve

    def __post_init__(self):
        if self.c0.degree != self.c1.degree:
            raise ValidationError("boundary curves must share one degree")

    def __eq__(self, other):
        if not isinstance(other, RuledSurface):
            return NotImplemented
        return self.c0 == other.c0 and self.c1 == other.c1


@dataclass(frozen=True)
class MetricsReport:
    """Warp-angle and fitting-distance summary over sampled rulings."""

    beta_max: float
    beta_avg: float
    d_max: float
    d_avg: float
    sample_count: int
    defects: tuple = ()


@dataclass(frozen=True, eq=False)
class Anchor:
    """Auxiliary segment W = (A, B); A sits on a ruling and B tilts the plane."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _vec3(self.a, "a")
        b = _vec3(self.b, "b")
        if np.linalg.norm(b - a) <= MIN_RULING_LENGTH:
            raise ValidationError("degenerate anchor segment")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def __eq__(self, other):
        if not isinstance(other, Anchor):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)


@dataclass(frozen=True, eq=False)
class PlaneChain:
    """Per-ruling anchor segments defining the working planes of chain design."""

    anchors: tuple

    def __post_init__(self):
        anchors = tuple(self.anchors)
        if not anchors:
            raise ValidationError("plane chain needs at least one anchor")
        object.__setattr__(self, "anchors", anchors)

    def __eq__(self, other):
        if not isinstance(other, PlaneChain):
            return NotImplemented
        return self.anchors == other.anchors


def distance_to_segment(point: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    d = b - a
    u = float(np.clip((point - a) @ d / (d @ d), 0.0, 1.0))
    return float(np.linalg.norm(a + u * d - point))


def ruling_plane(ruling: Ruling, anchor: Anchor):
    """Unit normal and base point of the plane spanned by a ruling and its anchor."""
    if distance_to_segment(anchor.a, ruling.q, ruling.p) > ANCHOR_ON_RULING_TOL:
        raise ValidationError("anchor point A does not lie on its ruling")
    w = anchor.b - anchor.a
    n = np.cross(ruling.p - ruling.q, w)
    norm = np.linalg.norm(n)
    if norm < NORMAL_EPS * max(np.linalg.norm(w), 1.0):
        raise DegenerateGeometryError("anchor segment parallel to ruling: plane undefined")
    return n / norm, ruling.q


def validate_chain(chain: PlaneChain, rulings) -> None:
    """Check every anchor sits on its ruling and spans a valid plane.

    Anchors align with the rulings from the end, so a chain may carry anchors
    for only the most recent rulings; the last anchor belongs to the last
    ruling.
    """
    count = len(chain.anchors)
    if count > len(rulings):
        raise ValidationError("more anchors than rulings")
    offset = len(rulings) - count
    for i, anchor in enumerate(chain.anchors):
        ruling_plane(rulings[offset + i], anchor)


def snap_to_plane(ruling: Ruling, anchor: Anchor, next_q, next_p,
                  snap_tol: float = DEFAULT_SNAP_TOL) -> Ruling:
    """Project candidate endpoints onto the plane of a ruling and its anchor.

    Rejects a candidate farther than `snap_tol` from the plane, reporting the
    offending distance.
    """
    normal, base = ruling_plane(ruling, anchor)
    snapped = []
    for name, raw in (("Q", next_q), ("P", next_p)):
        pt = _vec3(raw, name)
        dist = float((pt - base) @ normal)
        if abs(dist) > snap_tol:
            raise ValidationError(
                f"point {name} is {abs(dist):.6g} from the working plane "
                f"(snap tolerance {snap_tol:.6g})"
            )
        snapped.append(pt - dist * normal)
    return Ruling(snapped[0], snapped[1])


def eval_surface(surface: RuledSurface, t: float, s: float) -> np.ndarray:
    """Linear blend of the boundary curves at (t, s)."""
    if not 0.0 <= t <= 1.0 or not 0.0 <= s <= 1.0:
        raise DomainError(f"(t, s) = ({t}, {s}) outside the unit square")
    return (1.0 - s) * evaluate_curve(surface.c0, t) + s * evaluate_curve(surface.c1, t)


def _normal_unnormalized(surface: RuledSurface, t: float, s: float) -> np.ndarray:
    c0, d0 = _derivatives_up_to(surface.c0, t, 1)
    c1, d1 = _derivatives_up_to(surface.c1, t, 1)
    dt = (1.0 - s) * d0 + s * d1
    ds = c1 - c0
    return np.cross(dt, ds)


def surface_normal(surface: RuledSurface, t: float, s: float) -> np.ndarray:
    """Unit normal: normalized cross product of the t- and s-partials."""
    if not 0.0 <= t <= 1.0 or not 0.0 <= s <= 1.0:
        raise DomainError(f"(t, s) = ({t}, {s}) outside the unit square")
    n = _normal_unnormalized(surface, t, s)
    norm = np.linalg.norm(n)
    if norm < NORMAL_EPS:
        raise DegenerateGeometryError(f"degenerate surface normal at (t, s) = ({t}, {s})")
    return n / norm


def warp_angle(surface: RuledSurface, t: float) -> float:
    """Angle in degrees between the normals at the two ends of the ruling at t.

    Computed via atan2 of the cross and dot products, which stays accurate
    for the near-zero angles of almost-developable surfaces.
    """
    n0 = surface_normal(surface, t, 0.0)
    n1 = surface_normal(surface, t, 1.0)
    return float(np.degrees(np.arctan2(np.linalg.norm(np.cross(n0, n1)), n0 @ n1)))


def warp_samples(surface: RuledSurface, sample_count: int):
    """Warp angles at uniform parameters; degenerate samples are flagged."""
    if sample_count < 2:
        raise ValidationError(f"sample_count must be >= 2, got {sample_count}")
    angles = []
    defects = []
    for t in np.linspace(0.0, 1.0, sample_count):
        try:
            angles.append(warp_angle(surface, t))
        except DegenerateGeometryError:
            defects.append(float(t))
    if not angles:
        raise DegenerateGeometryError("normal degenerate at every metric sample")
    return angles, defects


def fitting_distances(surface: RuledSurface, rulings: RulingSequence,
                      matched_params=None):
    """Distances from all ruling endpoints to their boundary curves."""
    k = rulings.segment_count
    if matched_params is not None and len(matched_params) != k + 1:
        raise ValidationError("matched_params must supply one parameter per ruling")
    dists = []
    for i, r in enumerate(rulings):
        seed = i / k
        for curve, point in ((surface.c0, r.q), (surface.c1, r.p)):
            t_star = (float(matched_params[i]) if matched_params is not None
                      else foot_point(curve, point, seed))
            dists.append(float(np.linalg.norm(evaluate_curve(curve, t_star) - point)))
    return dists


def compute_metrics(surface: RuledSurface, rulings: RulingSequence,
                    sample_count: int = DEFAULT_METRIC_SAMPLES,
                    matched_params=None) -> MetricsReport:
    """Warp angles over uniform t-samples plus fitting distances of the data.

    Distances are foot-point projections by default; passing `matched_params`
    (one parameter per ruling) measures against the curve points at those
    parameters instead.
    """
    angles, defects = warp_samples(surface, sample_count)
    dists = fitting_distances(surface, rulings, matched_params)
    return MetricsReport(
        beta_max=float(np.max(angles)),
        beta_avg=float(np.mean(angles)),
        d_max=float(np.max(dists)),
        d_avg=float(np.mean(dists)),
        sample_count=sample_count,
        defects=tuple(defects),
    )


def strip_planarity_defect(rulings: RulingSequence) -> np.ndarray:
    """Scale-free coplanarity defect per adjacent ruling pair.

    Tetrahedron volume of {P_i, Q_i, Q_{i+1}, P_{i+1}} divided by the 1.5 power
    of the mean squared pairwise distance; zero exactly when coplanar.
    """
    out = np.empty(len(rulings) - 1)
    for i in range(len(rulings) - 1):
        a, b = rulings[i].p, rulings[i].q
        c, d = rulings[i + 1].q, rulings[i + 1].p
        volume = abs(np.linalg.det(np.stack([b - a, c - a, d - a]))) / 6.0
        pts = np.stack([a, b, c, d])
        diffs = pts[:, None, :] - pts[None, :, :]
        msel = (diffs ** 2).sum(axis=2)[np.triu_indices(4, k=1)].mean()
        out[i] = volume / msel ** 1.5
    return out


def extend_chain(chain: PlaneChain, rulings: RulingSequence, next_q, next_p,
                 snap_tol: float = DEFAULT_SNAP_TOL) -> RulingSequence:
    """Append a ruling snapped onto the working plane of the last ruling.

    Candidate endpoints farther than `snap_tol` from the plane are rejected
    with the offending distance.
    """
    validate_chain(chain, rulings)
    appended = snap_to_plane(rulings[-1], chain.anchors[-1], next_q, next_p, snap_tol)
    return RulingSequence(rulings.rulings + (appended,))
