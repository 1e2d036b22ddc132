"""Objective terms for quasi-developable surface fitting, with analytic gradients.

The assembled objective couples the boundary-curve control points with a field
of independent per-sample normal vectors. Three dot-product residuals per
sample drive developability; bending energy, width variation and data-fit
terms regularize the solution; a unit-norm penalty keeps the auxiliary
normals away from the trivial zero minimizer.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateGeometryError, ValidationError
from .splines import SplineCurve, design_matrix, evaluate_many
from .surface import RuledSurface, surface_normal

MODE_FIXED = "fixed-boundary"
MODE_RELAXED = "relaxed"

DEFAULT_SAMPLE_COUNT = 100  # M: normal/width sampling density


@dataclass(frozen=True, eq=False)
class NormalField:
    """Independent auxiliary normals N_k at strictly increasing parameters t_k."""

    params: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        vectors = np.asarray(self.vectors, dtype=float)
        if params.ndim != 1 or len(params) < 2:
            raise ValidationError("normal field needs at least two samples")
        if vectors.shape != (len(params), 3):
            raise ValidationError(
                f"vectors shape {vectors.shape} does not match {len(params)} samples"
            )
        if params[0] != 0.0 or params[-1] != 1.0 or np.any(np.diff(params) <= 0):
            raise ValidationError("normal parameters must strictly increase from 0 to 1")
        params.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "vectors", vectors)

    def __len__(self):
        return len(self.params)

    def normalized(self) -> "NormalField":
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        if np.any(norms < 1e-12):
            raise DegenerateGeometryError("cannot normalize a vanishing normal")
        return NormalField(self.params, self.vectors / norms)

    def __eq__(self, other):
        if not isinstance(other, NormalField):
            return NotImplemented
        return np.array_equal(self.params, other.params) and np.array_equal(
            self.vectors, other.vectors
        )


@dataclass(frozen=True)
class Weights:
    """Nonnegative weights of the regularizing and data-fit terms."""

    lambda_energy: float = 0.0
    lambda_width: float = 0.0
    lambda_interior: float = 0.0
    lambda_closeness: float = 0.0
    lambda_unit: float = 1.0

    def __post_init__(self):
        for name in ("lambda_energy", "lambda_width", "lambda_interior",
                     "lambda_closeness", "lambda_unit"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be nonnegative")

    @classmethod
    def for_fixed_boundary(cls, **overrides) -> "Weights":
        base = cls(lambda_energy=0.001, lambda_width=0.00001, lambda_interior=1.0)
        return replace(base, **overrides) if overrides else base

    @classmethod
    def for_relaxed(cls, **overrides) -> "Weights":
        base = cls(lambda_energy=0.00001, lambda_width=0.00001, lambda_closeness=1.0)
        return replace(base, **overrides) if overrides else base


@dataclass(frozen=True, eq=False)
class OptimizationProblem:
    """Variable layout plus frozen data for one objective assembly.

    Terminal control points of every optimized curve stay out of the variable
    vector, which enforces the terminal rulings exactly. In fixed-boundary
    mode c0 is frozen entirely and only interior targets on the c1 side pull;
    in relaxed mode both curves' interiors are free and the closeness term
    pulls on both sides.
    """

    mode: str
    c0: SplineCurve
    c1: SplineCurve
    normal_params: np.ndarray
    weights: Weights
    interior_params: np.ndarray = field(default_factory=lambda: np.empty(0))
    interior_q: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    interior_p: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    literal_closeness: bool = False

    def __post_init__(self):
        if self.mode not in (MODE_FIXED, MODE_RELAXED):
            raise ValidationError(f"unknown mode {self.mode!r}")
        ip = np.asarray(self.interior_params, dtype=float)
        tq = np.asarray(self.interior_q, dtype=float).reshape(-1, 3)
        tp = np.asarray(self.interior_p, dtype=float).reshape(-1, 3)
        if len(tp) != len(ip) or (self.mode == MODE_RELAXED and len(tq) != len(ip)):
            raise ValidationError("interior targets and parameters must align")
        object.__setattr__(self, "normal_params", np.asarray(self.normal_params, dtype=float))
        object.__setattr__(self, "interior_params", ip)
        object.__setattr__(self, "interior_q", tq)
        object.__setattr__(self, "interior_p", tp)


def bending_matrix(curve: SplineCurve) -> np.ndarray:
    """Quadratic form of the second-derivative energy on the control points.

    Per-span Gauss quadrature with `degree` points, exact for the piecewise
    polynomial integrand.
    """
    p = curve.degree
    n = curve.n_ctrl
    nodes, weights = np.polynomial.legendre.leggauss(max(p, 2))
    e = np.zeros((n, n))
    knots = curve.knots
    for a, b in zip(knots[p:n], knots[p + 1:n + 1]):
        if b <= a:
            continue
        half = 0.5 * (b - a)
        for x, w in zip(nodes, weights):
            t = a + half * (x + 1.0)
            row = design_matrix(knots, p, n, [t], order=2)[0]
            e += (w * half) * np.outer(row, row)
    return e


def f_energy(curve: SplineCurve) -> float:
    """Integral of the squared second derivative over the curve."""
    if curve.degree < 2:
        raise ValidationError("bending energy needs degree >= 2")
    e = bending_matrix(curve)
    cps = curve.control_points
    return float(np.einsum("id,ij,jd->", cps, e, cps))


def f_dev(surface: RuledSurface, normals: NormalField) -> float:
    """Sum of squared developability residuals at the normal samples."""
    if len(normals) < 2:
        raise ValidationError("need at least two normal samples")
    t = normals.params
    n = normals.vectors
    d0 = evaluate_many(surface.c0, t, order=1)
    d1 = evaluate_many(surface.c1, t, order=1)
    w = evaluate_many(surface.c0, t) - evaluate_many(surface.c1, t)
    r = np.einsum("kd,kd->k", d0, n) ** 2
    r += np.einsum("kd,kd->k", d1, n) ** 2
    r += np.einsum("kd,kd->k", w, n) ** 2
    return float(r.sum())


def f_width(surface: RuledSurface, sample_params) -> float:
    """Sum of squared consecutive differences of the squared ruling widths."""
    t = np.asarray(sample_params, dtype=float)
    if len(t) < 2:
        raise ValidationError("need at least two width samples")
    w = evaluate_many(surface.c0, t) - evaluate_many(surface.c1, t)
    widths = np.einsum("kd,kd->k", w, w)
    return float((np.diff(widths) ** 2).sum())


def f_interior(curve: SplineCurve, targets, params) -> float:
    """Sum of squared distances from interior targets to the curve at their params."""
    tp = np.asarray(targets, dtype=float).reshape(-1, 3)
    t = np.asarray(params.params if hasattr(params, "params") else params, dtype=float)
    if len(tp) != len(t):
        raise ValidationError("interior targets and parameters must align")
    if len(tp) == 0:
        return 0.0
    e = evaluate_many(curve, t) - tp
    return float((e ** 2).sum())


def f_closeness(surface: RuledSurface, rulings, params, literal: bool = False) -> float:
    """Fit of both boundary curves to the interior ruling endpoints.

    Default is the symmetric sum of squared distances on each side. With
    `literal=True` the c0-side distance enters unsquared inside an outer
    square (compatibility reading; see package docs).
    """
    t = np.asarray(params.params if hasattr(params, "params") else params, dtype=float)
    q = rulings.q_points[1:-1] if hasattr(rulings, "q_points") else np.asarray(rulings)[0]
    p = rulings.p_points[1:-1] if hasattr(rulings, "p_points") else np.asarray(rulings)[1]
    if len(q) != len(t) or len(p) != len(t):
        raise ValidationError("interior rulings and parameters must align")
    if len(t) == 0:
        return 0.0
    e0 = evaluate_many(surface.c0, t) - q
    e1 = evaluate_many(surface.c1, t) - p
    sq0 = np.einsum("kd,kd->k", e0, e0)
    sq1 = np.einsum("kd,kd->k", e1, e1)
    if literal:
        return float(((sq1 + np.sqrt(sq0)) ** 2).sum())
    return float((sq1 + sq0).sum())


def init_normals(surface: RuledSurface, m: int) -> NormalField:
    """Normals at M+1 uniform parameters, averaging the two ruling-end normals.

    Degenerate samples copy the nearest nondegenerate neighbor.
    """
    if m < 1:
        raise ValidationError(f"sample count M must be >= 1, got {m}")
    t = np.linspace(0.0, 1.0, m + 1)
    vectors = np.zeros((m + 1, 3))
    ok = np.zeros(m + 1, dtype=bool)
    for k, tk in enumerate(t):
        try:
            n0 = surface_normal(surface, tk, 0.0)
            n1 = surface_normal(surface, tk, 1.0)
            mean = 0.5 * (n0 + n1)
            norm = np.linalg.norm(mean)
            if norm < 1e-12:
                continue
            vectors[k] = mean / norm
            ok[k] = True
        except DegenerateGeometryError:
            continue
    if not ok.any():
        raise DegenerateGeometryError("surface normal degenerate at every sample")
    if not ok.all():
        good = np.flatnonzero(ok)
        for k in np.flatnonzero(~ok):
            vectors[k] = vectors[good[np.argmin(np.abs(good - k))]]
    return NormalField(t, vectors)


class ObjectiveEvaluator:
    """Callable objective with analytic gradient over a flat variable vector.

    Layout: [free c0 control points | free c1 control points | normals],
    each entry expanded to xyz. Immutable after assembly; concurrent calls at
    different vectors are safe, and per-sample sums reduce in a fixed order.
    """

    def __init__(self, problem: OptimizationProblem):
        self.problem = problem
        w = problem.weights
        c0, c1 = problem.c0, problem.c1

        self._free0 = (
            np.arange(1, c0.n_ctrl - 1) if problem.mode == MODE_RELAXED else np.arange(0)
        )
        self._free1 = np.arange(1, c1.n_ctrl - 1)
        if len(self._free1) == 0:
            raise ValidationError("c1 has no interior control points to optimize")

        t = problem.normal_params
        self._v0 = design_matrix(c0.knots, c0.degree, c0.n_ctrl, t)
        self._v1 = design_matrix(c1.knots, c1.degree, c1.n_ctrl, t)
        self._d0 = design_matrix(c0.knots, c0.degree, c0.n_ctrl, t, order=1)
        self._d1 = design_matrix(c1.knots, c1.degree, c1.n_ctrl, t, order=1)

        ti = problem.interior_params
        self._vi0 = design_matrix(c0.knots, c0.degree, c0.n_ctrl, ti)
        self._vi1 = design_matrix(c1.knots, c1.degree, c1.n_ctrl, ti)

        self._e0 = bending_matrix(c0) if w.lambda_energy > 0 else None
        self._e1 = bending_matrix(c1) if w.lambda_energy > 0 else None

        self._n_normals = len(t)
        self._len0 = 3 * len(self._free0)
        self._len1 = 3 * len(self._free1)
        self.n_variables = self._len0 + self._len1 + 3 * self._n_normals

    # --- variable vector packing -------------------------------------------

    def pack(self, cp0: np.ndarray, cp1: np.ndarray, normals: np.ndarray) -> np.ndarray:
        return np.concatenate([
            cp0[self._free0].ravel(),
            cp1[self._free1].ravel(),
            normals.ravel(),
        ])

    def split(self, x: np.ndarray):
        """Full control-point and normal arrays for a variable vector."""
        if len(x) != self.n_variables:
            raise ValidationError(
                f"variable vector has length {len(x)}, expected {self.n_variables}"
            )
        cp0 = np.array(self.problem.c0.control_points)
        cp1 = np.array(self.problem.c1.control_points)
        cp0[self._free0] = x[: self._len0].reshape(-1, 3)
        cp1[self._free1] = x[self._len0:self._len0 + self._len1].reshape(-1, 3)
        normals = x[self._len0 + self._len1:].reshape(-1, 3)
        return cp0, cp1, normals

    def unpack(self, x: np.ndarray):
        """Domain objects (curves plus normal field) for a variable vector."""
        cp0, cp1, normals = self.split(x)
        return (
            self.problem.c0.with_control_points(cp0),
            self.problem.c1.with_control_points(cp1),
            NormalField(self.problem.normal_params, normals),
        )

    def initial_vector(self, normals: NormalField) -> np.ndarray:
        if len(normals) != self._n_normals:
            raise ValidationError("normal field does not match the problem layout")
        return self.pack(
            np.array(self.problem.c0.control_points),
            np.array(self.problem.c1.control_points),
            np.array(normals.vectors),
        )

    # --- evaluation ---------------------------------------------------------

    def _core(self, x: np.ndarray, with_grad: bool):
        w = self.problem.weights
        cp0, cp1, normals = self.split(x)
        g0 = np.zeros_like(cp0)
        g1 = np.zeros_like(cp1)
        gn = np.zeros_like(normals)
        terms = {}

        a0 = self._v0 @ cp0
        a1 = self._v1 @ cp1
        d0 = self._d0 @ cp0
        d1 = self._d1 @ cp1
        diff = a0 - a1

        r0 = np.einsum("kd,kd->k", d0, normals)
        r1 = np.einsum("kd,kd->k", d1, normals)
        r2 = np.einsum("kd,kd->k", diff, normals)
        terms["dev"] = float((r0 ** 2 + r1 ** 2 + r2 ** 2).sum())
        if with_grad:
            g0 += 2.0 * (self._d0.T @ (r0[:, None] * normals))
            g0 += 2.0 * (self._v0.T @ (r2[:, None] * normals))
            g1 += 2.0 * (self._d1.T @ (r1[:, None] * normals))
            g1 -= 2.0 * (self._v1.T @ (r2[:, None] * normals))
            gn += 2.0 * (r0[:, None] * d0 + r1[:, None] * d1 + r2[:, None] * diff)

        unit = np.einsum("kd,kd->k", normals, normals) - 1.0
        terms["unit"] = float((unit ** 2).sum())
        if with_grad and w.lambda_unit > 0:
            gn += w.lambda_unit * 4.0 * unit[:, None] * normals

        if w.lambda_energy > 0:
            if self.problem.mode == MODE_RELAXED:
                terms["energy"] = float(
                    np.einsum("id,ij,jd->", cp0, self._e0, cp0)
                    + np.einsum("id,ij,jd->", cp1, self._e1, cp1)
                )
                if with_grad:
                    g0 += w.lambda_energy * 2.0 * (self._e0 @ cp0)
                    g1 += w.lambda_energy * 2.0 * (self._e1 @ cp1)
            else:
                terms["energy"] = float(np.einsum("id,ij,jd->", cp1, self._e1, cp1))
                if with_grad:
                    g1 += w.lambda_energy * 2.0 * (self._e1 @ cp1)
        else:
            terms["energy"] = 0.0

        widths = np.einsum("kd,kd->k", diff, diff)
        deltas = widths[:-1] - widths[1:]
        terms["width"] = float((deltas ** 2).sum())
        if with_grad and w.lambda_width > 0:
            z = np.zeros_like(widths)
            z[:-1] += 2.0 * deltas
            z[1:] -= 2.0 * deltas
            pull = w.lambda_width * 2.0 * z[:, None] * diff
            g0 += self._v0.T @ pull
            g1 -= self._v1.T @ pull

        if len(self.problem.interior_params):
            e1 = self._vi1 @ cp1 - self.problem.interior_p
            sq1 = np.einsum("kd,kd->k", e1, e1)
            if self.problem.mode == MODE_FIXED:
                terms["interior"] = float(sq1.sum())
                if with_grad and w.lambda_interior > 0:
                    g1 += w.lambda_interior * 2.0 * (self._vi1.T @ e1)
            else:
                e0 = self._vi0 @ cp0 - self.problem.interior_q
                sq0 = np.einsum("kd,kd->k", e0, e0)
                if self.problem.literal_closeness:
                    dist0 = np.sqrt(sq0)
                    s = sq1 + dist0
                    terms["closeness"] = float((s ** 2).sum())
                    if with_grad and w.lambda_closeness > 0:
                        g1 += w.lambda_closeness * (self._vi1.T @ (4.0 * s[:, None] * e1))
                        safe = np.where(dist0 > 1e-14, dist0, 1.0)
                        scale = np.where(dist0 > 1e-14, 2.0 * s / safe, 0.0)
                        g0 += w.lambda_closeness * (self._vi0.T @ (scale[:, None] * e0))
                else:
                    terms["closeness"] = float((sq1 + sq0).sum())
                    if with_grad and w.lambda_closeness > 0:
                        g1 += w.lambda_closeness * 2.0 * (self._vi1.T @ e1)
                        g0 += w.lambda_closeness * 2.0 * (self._vi0.T @ e0)
        else:
            terms["interior" if self.problem.mode == MODE_FIXED else "closeness"] = 0.0

        fit_key = "interior" if self.problem.mode == MODE_FIXED else "closeness"
        fit_weight = w.lambda_interior if self.problem.mode == MODE_FIXED else w.lambda_closeness
        value = (
            terms["dev"]
            + w.lambda_unit * terms["unit"]
            + w.lambda_energy * terms["energy"]
            + w.lambda_width * terms["width"]
            + fit_weight * terms[fit_key]
        )
        if not with_grad:
            return value, None, terms
        grad = self.pack(g0, g1, gn)
        return value, grad, terms

    def value(self, x: np.ndarray) -> float:
        return self._core(x, with_grad=False)[0]

    def terms(self, x: np.ndarray) -> dict:
        """Unweighted values of the individual objective terms."""
        return self._core(x, with_grad=False)[2]

    def __call__(self, x: np.ndarray):
        value, grad, _ = self._core(x, with_grad=True)
        return value, grad


def assemble(problem: OptimizationProblem) -> ObjectiveEvaluator:
    """Build the objective evaluator for a configured problem."""
    return ObjectiveEvaluator(problem)
