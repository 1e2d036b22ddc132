"""End-to-end surface fitting pipelines and synthetic ruling generation.

Both pipelines rescale their inputs into the unit box before optimizing and
unscale the curves on output; reported distance metrics stay in unit-box
units. Terminal control points are pinned to the terminal ruling endpoints
and never optimized, so the first and last rulings are matched exactly.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, ValidationError
from .objective import (
    DEFAULT_SAMPLE_COUNT,
    MODE_FIXED,
    MODE_RELAXED,
    NormalField,
    OptimizationProblem,
    Weights,
    assemble,
    init_normals,
)
from .optimizer import SolverOptions, minimize
from .splines import (
    FOOTPOINT_AVERAGE,
    Parametrization,
    SplineCurve,
    average_ruling_params,
    centripetal_params,
    evaluate_curve,
    foot_point,
    greville_abscissae,
    interpolate,
    repair_monotone,
    uniform_clamped_knots,
)
from .surface import (
    DEFAULT_METRIC_SAMPLES,
    MetricsReport,
    RuledSurface,
    Ruling,
    RulingSequence,
    fitting_distances,
    warp_angle,
    warp_samples,
)

DEFAULT_DEGREE = 3
BETA_REGRESSION_SLACK = 1e-9
FIXED_BOUNDARY_FIT_TOL = 1e-6

STRIP_KINDS = ("planar", "cylinder", "cone", "coplanar-chain", "perturbed")

TERMINATION_CONVERGED = "converged"
TERMINATION_MAX_OUTER = "max-outer"
TERMINATION_REGRESSION = "regression"


@dataclass(frozen=True)
class OuterOptions:
    max_outer: int = 20
    rel_improve_tol: float = 1e-3

    def __post_init__(self):
        if self.max_outer < 1:
            raise ValidationError("max_outer must be >= 1")
        if self.rel_improve_tol <= 0:
            raise ValidationError("rel_improve_tol must be positive")


@dataclass(frozen=True)
class OuterIterate:
    beta_max: float
    beta_avg: float
    objective: float


@dataclass(frozen=True)
class PipelineResult:
    """Fitted surface plus quality metrics and per-outer-iteration trace.

    The surface is in the input's coordinates; `metrics` and
    `closeness_residual` are measured in unit-box units with `scale` the
    unit-box edge length. `outer_trace[0]` describes the initial surface.
    """

    surface: RuledSurface
    normals: NormalField
    metrics: MetricsReport
    outer_trace: tuple
    termination: str
    scale: float
    closeness_residual: float
    elapsed_seconds: float
    initial_surface: RuledSurface

    @property
    def outer_iterations(self) -> int:
        return len(self.outer_trace) - 1


def _unit_box(points: np.ndarray):
    lo = points.min(axis=0)
    extent = float((points.max(axis=0) - lo).max())
    if extent <= 0.0:
        raise DegenerateGeometryError("input geometry has zero extent")
    return lo, extent


def _scale_rulings(rulings: RulingSequence, lo, scale) -> RulingSequence:
    return RulingSequence(tuple(
        Ruling((r.q - lo) / scale, (r.p - lo) / scale) for r in rulings
    ))


def _scale_curve(curve: SplineCurve, lo, scale) -> SplineCurve:
    return curve.with_control_points((curve.control_points - lo) / scale)


def _unscale_curve(curve: SplineCurve, lo, scale, start, end) -> SplineCurve:
    cps = curve.control_points * scale + lo
    cps[0] = start
    cps[-1] = end
    return curve.with_control_points(cps)


def _pin_terminals(curve: SplineCurve, start, end) -> SplineCurve:
    cps = np.array(curve.control_points)
    cps[0] = start
    cps[-1] = end
    return curve.with_control_points(cps)


def _similarity_map(points: np.ndarray, e0, e1, p0, p1) -> np.ndarray:
    """Rotate, scale and translate `points` so e0 -> p0 and e1 -> p1."""
    d1 = e1 - e0
    d2 = p1 - p0
    n1 = np.linalg.norm(d1)
    n2 = np.linalg.norm(d2)
    if n1 < 1e-12 or n2 < 1e-12:
        raise DegenerateGeometryError("cannot map a degenerate segment")
    u1 = d1 / n1
    u2 = d2 / n2
    axis = np.cross(u1, u2)
    sin = np.linalg.norm(axis)
    cos = float(u1 @ u2)
    shifted = points - e0
    if sin < 1e-14:
        if cos > 0:
            rotated = shifted
        else:
            # Opposite directions: flip around any axis orthogonal to u1.
            helper = np.array([1.0, 0.0, 0.0])
            if abs(u1[0]) > 0.9:
                helper = np.array([0.0, 1.0, 0.0])
            ax = np.cross(u1, helper)
            ax /= np.linalg.norm(ax)
            rotated = 2.0 * np.outer(shifted @ ax, ax) - shifted
    else:
        ax = axis / sin
        angle = np.arctan2(sin, cos)
        c, s = np.cos(angle), np.sin(angle)
        rotated = shifted * c + np.cross(ax, shifted) * s + np.outer(shifted @ ax, ax) * (1.0 - c)
    return p0 + (n2 / n1) * rotated


def _initial_curve(points: np.ndarray, params: Parametrization, degree: int) -> SplineCurve:
    """Interpolating curve through the data, falling back to a straight segment
    carrying degree+1 control points when there are too few data points."""
    if len(points) >= degree + 1:
        curve = interpolate(points, params, degree)
    else:
        knots = uniform_clamped_knots(degree + 1, degree)
        xi = greville_abscissae(knots, degree)
        cps = points[0][None, :] + xi[:, None] * (points[-1] - points[0])[None, :]
        curve = SplineCurve(degree, knots, cps)
    return _pin_terminals(curve, points[0], points[-1])


def _effective_degree(point_count: int, degree: int) -> int:
    if point_count >= degree + 1:
        return degree
    return max(2, point_count - 1) if point_count >= 3 else degree


def averaged_centripetal_params(rulings: RulingSequence) -> Parametrization:
    """Per-ruling mean of the centripetal parameters of the two endpoint runs."""
    u = centripetal_params(rulings.q_points)
    v = centripetal_params(rulings.p_points)
    return average_ruling_params(u, v)


def initial_interpolation(rulings: RulingSequence, degree: int = DEFAULT_DEGREE):
    """Initial boundary curves interpolating the ruling endpoints.

    Returns (c0, c1, params); both curves share the degree (lowered for very
    short sequences) and have their terminal control points pinned exactly.
    """
    t = averaged_centripetal_params(rulings)
    deg = _effective_degree(len(rulings), degree)
    c0 = _initial_curve(rulings.q_points, t, deg)
    c1 = _initial_curve(rulings.p_points, t, deg)
    return c0, c1, t


def _beta_stats(surface: RuledSurface, sample_count: int = 100):
    angles = []
    for t in np.linspace(0.0, 1.0, sample_count):
        try:
            angles.append(warp_angle(surface, t))
        except DegenerateGeometryError:
            continue
    if not angles:
        raise DegenerateGeometryError("normal degenerate at every warp sample")
    return float(np.max(angles)), float(np.mean(angles))


def _pipeline_metrics(surface_world: RuledSurface, surface_unit: RuledSurface,
                      rulings_unit: RulingSequence) -> MetricsReport:
    """Warp stats on the returned surface, distances in unit-box units.

    Sampling the world-coordinate surface keeps the report bitwise consistent
    with mesh exports of the same surface; warp angles are scale-invariant.
    """
    angles, defects = warp_samples(surface_world, DEFAULT_METRIC_SAMPLES)
    dists = fitting_distances(surface_unit, rulings_unit)
    return MetricsReport(
        beta_max=float(np.max(angles)),
        beta_avg=float(np.mean(angles)),
        d_max=float(np.max(dists)),
        d_avg=float(np.mean(dists)),
        sample_count=DEFAULT_METRIC_SAMPLES,
        defects=tuple(defects),
    )


def fit_fixed_boundary(c0: SplineCurve, rulings: RulingSequence,
                       weights: Weights = None,
                       samples: int = DEFAULT_SAMPLE_COUNT,
                       solver_options: SolverOptions = None) -> PipelineResult:
    """Fit the free boundary curve of a surface whose other boundary is fixed.

    The data parameters of the free-side targets are the foot-point parameters
    of the fixed-side endpoints on c0. Optimizes the interior control points
    of c1 plus the auxiliary normals; c0 is left untouched.
    """
    started = time.perf_counter()
    w = weights or Weights.for_fixed_boundary()

    world_q = rulings.q_points
    world_p = rulings.p_points
    lo, scale = _unit_box(np.vstack([world_q, world_p, c0.control_points]))
    c0u = _scale_curve(c0, lo, scale)
    seq = _scale_rulings(rulings, lo, scale)
    q = seq.q_points
    p = seq.p_points
    k = seq.segment_count

    feet = np.array([
        foot_point(c0u, q[i], min(max(i / k, 0.0), 1.0)) for i in range(k + 1)
    ])
    dists = np.array([
        np.linalg.norm(evaluate_curve(c0u, feet[i]) - q[i]) for i in range(k + 1)
    ])
    offenders = np.flatnonzero(dists > FIXED_BOUNDARY_FIT_TOL)
    if len(offenders):
        raise ValidationError(
            "fixed curve does not pass through ruling endpoints "
            f"{[int(i) for i in offenders]} (unit-box distances "
            f"{[float(round(dists[i], 9)) for i in offenders]})"
        )
    feet[0], feet[-1] = 0.0, 1.0
    t = repair_monotone(feet)

    if k + 1 >= c0.degree + 1:
        c1u = interpolate(p, t, c0.degree)
    else:
        cps = _similarity_map(np.array(c0u.control_points),
                              c0u.control_points[0], c0u.control_points[-1],
                              p[0], p[-1])
        c1u = SplineCurve(c0.degree, c0u.knots, cps)
    c1u = _pin_terminals(c1u, p[0], p[-1])

    c1_init_world = _unscale_curve(c1u, lo, scale, world_p[0], world_p[-1])
    normals = init_normals(RuledSurface(c0u, c1u), samples)
    problem = OptimizationProblem(
        MODE_FIXED, c0u, c1u, np.linspace(0.0, 1.0, samples + 1), w,
        interior_params=t[1:-1], interior_p=p[1:-1],
    )
    evaluator = assemble(problem)
    x0 = evaluator.initial_vector(normals)
    beta0 = _beta_stats(RuledSurface(c0u, c1u))
    trace = [OuterIterate(beta0[0], beta0[1], evaluator.value(x0))]

    x_star, solver_trace = minimize(evaluator, x0, solver_options)
    c0f, c1f, normals = evaluator.unpack(x_star)
    surface_u = RuledSurface(c0f, c1f)
    beta1 = _beta_stats(surface_u)
    trace.append(OuterIterate(beta1[0], beta1[1], evaluator.value(x_star)))

    c1_world = _unscale_curve(c1f, lo, scale, world_p[0], world_p[-1])
    metrics = _pipeline_metrics(RuledSurface(c0, c1_world), surface_u, seq)
    return PipelineResult(
        surface=RuledSurface(c0, c1_world),
        normals=normals.normalized(),
        metrics=metrics,
        outer_trace=tuple(trace),
        termination=solver_trace.termination,
        scale=scale,
        closeness_residual=evaluator.terms(x_star)["interior"],
        elapsed_seconds=time.perf_counter() - started,
        initial_surface=RuledSurface(c0, c1_init_world),
    )


def _reproject_params(c0: SplineCurve, c1: SplineCurve, q: np.ndarray, p: np.ndarray,
                      seeds: np.ndarray) -> Parametrization:
    count = len(q)
    u = np.empty(count)
    v = np.empty(count)
    for i in range(count):
        u[i] = foot_point(c0, q[i], seeds[i])
        v[i] = foot_point(c1, p[i], seeds[i])
    u[0] = v[0] = 0.0
    u[-1] = v[-1] = 1.0
    labels = (FOOTPOINT_AVERAGE,) * count
    return average_ruling_params(
        Parametrization(repair_monotone(u), labels),
        Parametrization(repair_monotone(v), labels),
    )


def fit_relaxed(rulings: RulingSequence,
                weights: Weights = None,
                samples: int = DEFAULT_SAMPLE_COUNT,
                outer: OuterOptions = None,
                solver_options: SolverOptions = None,
                degree: int = DEFAULT_DEGREE,
                literal_closeness: bool = False) -> PipelineResult:
    """Fit both boundary curves to the rulings with soft interior closeness.

    Alternates minimization with foot-point reparametrization of the data
    until the maximum warp angle stops improving. Keeps the lowest-warp
    iterate and returns it if a later iteration regresses.
    """
    started = time.perf_counter()
    w = weights or Weights.for_relaxed()
    opts = outer or OuterOptions()

    world_q = rulings.q_points
    world_p = rulings.p_points
    lo, scale = _unit_box(np.vstack([world_q, world_p]))
    seq = _scale_rulings(rulings, lo, scale)
    q = seq.q_points
    p = seq.p_points

    c0, c1, t = initial_interpolation(seq, degree)
    initial_world = RuledSurface(
        _unscale_curve(c0, lo, scale, world_q[0], world_q[-1]),
        _unscale_curve(c1, lo, scale, world_p[0], world_p[-1]),
    )
    normals = init_normals(RuledSurface(c0, c1), samples)

    beta_prev, beta_avg0 = _beta_stats(RuledSurface(c0, c1))
    normal_params = np.linspace(0.0, 1.0, samples + 1)

    def build(params):
        problem = OptimizationProblem(
            MODE_RELAXED, c0, c1, normal_params, w,
            interior_params=params.params[1:-1],
            interior_q=q[1:-1], interior_p=p[1:-1],
            literal_closeness=literal_closeness,
        )
        return assemble(problem)

    evaluator = build(t)
    x0 = evaluator.initial_vector(normals)
    trace = [OuterIterate(beta_prev, beta_avg0, evaluator.value(x0))]
    best = (beta_prev, c0, c1, normals, evaluator.terms(x0)["closeness"])
    termination = TERMINATION_MAX_OUTER

    for _ in range(opts.max_outer):
        evaluator = build(t)
        x_star, _ = minimize(evaluator, evaluator.initial_vector(normals), solver_options)
        c0, c1, normals = evaluator.unpack(x_star)
        beta_max, beta_avg = _beta_stats(RuledSurface(c0, c1))
        closeness = evaluator.terms(x_star)["closeness"]
        trace.append(OuterIterate(beta_max, beta_avg, evaluator.value(x_star)))

        if beta_max < best[0]:
            best = (beta_max, c0, c1, normals, closeness)
        if beta_max > beta_prev + BETA_REGRESSION_SLACK:
            termination = TERMINATION_REGRESSION
            break
        if (beta_prev - beta_max) / max(beta_prev, 1e-12) < opts.rel_improve_tol:
            termination = TERMINATION_CONVERGED
            break
        beta_prev = beta_max

        t = _reproject_params(c0, c1, q, p, t.params)

    _, c0, c1, normals, closeness = best
    c0_world = _unscale_curve(c0, lo, scale, world_q[0], world_q[-1])
    c1_world = _unscale_curve(c1, lo, scale, world_p[0], world_p[-1])
    metrics = _pipeline_metrics(RuledSurface(c0_world, c1_world),
                                RuledSurface(c0, c1), seq)
    return PipelineResult(
        surface=RuledSurface(c0_world, c1_world),
        normals=normals.normalized(),
        metrics=metrics,
        outer_trace=tuple(trace),
        termination=termination,
        scale=scale,
        closeness_residual=closeness,
        elapsed_seconds=time.perf_counter() - started,
        initial_surface=initial_world,
    )


def _rotate(v: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    ax = axis / np.linalg.norm(axis)
    c, s = np.cos(angle), np.sin(angle)
    return v * c + np.cross(ax, v) * s + ax * (ax @ v) * (1.0 - c)


def _coplanar_chain(rng: np.random.Generator, k: int) -> list:
    """Chain of rulings whose adjacent pairs are exactly coplanar.

    Each next ruling is drawn inside the working plane of the current one,
    then the plane is tilted about the new ruling line.
    """
    q = np.zeros(3)
    p = np.array([0.0, 1.0, 0.0])
    r = np.array([0.0, 1.0, 0.0])
    a = np.array([1.0, 0.0, 0.0])
    length = 1.0
    rulings = [Ruling(q, p)]
    for _ in range(k):
        step = rng.uniform(0.30, 0.42)
        slide = rng.uniform(-0.06, 0.06)
        skew = rng.uniform(-0.18, 0.18)
        length *= rng.uniform(0.92, 1.08)
        q = q + step * a + slide * r
        r = r + skew * a
        r /= np.linalg.norm(r)
        p = q + length * r
        rulings.append(Ruling(q, p))
        tilt = rng.uniform(0.06, 0.22) * rng.choice([-1.0, 1.0])
        a = _rotate(a, r, tilt)
        a -= (a @ r) * r
        a /= np.linalg.norm(a)
    return rulings


def gen_strip(kind: str, k: int, perturbation: float = 0.0, seed: int = 0) -> RulingSequence:
    """Synthesize a deterministic sequence of K+1 control rulings."""
    if kind not in STRIP_KINDS:
        raise ValidationError(f"unknown strip kind {kind!r}; expected one of {STRIP_KINDS}")
    if k < 1:
        raise ValidationError(f"K must be >= 1, got {k}")
    if perturbation < 0:
        raise ValidationError("perturbation must be nonnegative")
    rng = np.random.default_rng(seed)

    if kind == "planar":
        amp = rng.uniform(0.15, 0.3)
        wobble = rng.uniform(0.05, 0.12)
        x = np.linspace(0.0, 1.8, k + 1)
        rulings = []
        for i, xi in enumerate(x):
            qi = np.array([xi, amp * np.sin(np.pi * xi / 1.8), 0.0])
            width = 0.9 + wobble * np.sin(2.1 * xi)
            rulings.append(Ruling(qi, qi + np.array([0.15 * np.sin(xi), width, 0.0])))
        return RulingSequence(tuple(rulings))

    if kind == "cylinder":
        sweep = rng.uniform(0.9, 1.3)
        theta = np.linspace(0.0, sweep, k + 1)
        direction = np.array([0.0, 1.0, 0.25])
        rulings = [
            Ruling(np.array([np.sin(th), 0.0, 1.0 - np.cos(th)]),
                   np.array([np.sin(th), 0.0, 1.0 - np.cos(th)]) + direction)
            for th in theta
        ]
        return RulingSequence(tuple(rulings))

    if kind == "cone":
        sweep = rng.uniform(0.9, 1.3)
        apex = np.array([0.0, 0.25, 1.4])
        theta = np.linspace(-0.5 * sweep, 0.5 * sweep, k + 1)
        rulings = []
        for th in theta:
            qi = np.array([np.sin(th), -np.cos(th), 0.0])
            rulings.append(Ruling(qi, qi + 0.5 * (apex - qi)))
        return RulingSequence(tuple(rulings))

    chain = _coplanar_chain(rng, k)
    if kind == "perturbed":
        noise = rng.uniform(-perturbation, perturbation, size=(k + 1, 2, 3))
        chain = [
            Ruling(r.q + noise[i, 0], r.p + noise[i, 1]) for i, r in enumerate(chain)
        ]
    return RulingSequence(tuple(chain))


def subdivide_rulings(rulings: RulingSequence, times: int = 1) -> RulingSequence:
    """Insert midpoint rulings; planar quads stay planar under subdivision."""
    if times < 0:
        raise ValidationError("times must be nonnegative")
    items = list(rulings)
    for _ in range(times):
        refined = []
        for left, right in zip(items[:-1], items[1:]):
            refined.append(left)
            refined.append(Ruling(0.5 * (left.q + right.q), 0.5 * (left.p + right.p)))
        refined.append(items[-1])
        items = refined
    return RulingSequence(tuple(items))
