"""Limited-memory quasi-Newton minimization with a strong Wolfe line search."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SolverError, ValidationError

WOLFE_SUFFICIENT_DECREASE = 1e-4
WOLFE_CURVATURE = 0.9

_LINESEARCH_MAX_EXPANSIONS = 20
_LINESEARCH_MAX_ZOOM = 40

TERMINATION_GRADIENT = "gradient-tolerance"
TERMINATION_STEP = "step-tolerance"
TERMINATION_MAX_ITER = "max-iterations"
TERMINATION_LINESEARCH = "line-search"


@dataclass(frozen=True)
class SolverOptions:
    memory: int = 10
    max_iterations: int = 500
    gradient_tolerance: float = 1e-8
    step_tolerance: float = 1e-12

    def __post_init__(self):
        for name in ("memory", "max_iterations", "gradient_tolerance", "step_tolerance"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")


@dataclass(frozen=True)
class IterationRecord:
    value: float
    gradient_norm: float
    step_length: float


@dataclass
class SolverTrace:
    iterations: list = field(default_factory=list)
    termination: str = ""

    @property
    def values(self) -> np.ndarray:
        return np.array([rec.value for rec in self.iterations])


def _checked(evaluator, x):
    value, grad = evaluator(x)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        raise SolverError("non-finite objective value or gradient", iterate=np.array(x))
    return float(value), np.asarray(grad, dtype=float)


def _cubic_step(a_lo, f_lo, g_lo, a_hi, f_hi):
    """Minimizer of the cubic through (a_lo, f_lo, g_lo) and (a_hi, f_hi)."""
    d = a_hi - a_lo
    if d == 0.0:
        return a_lo
    # Quadratic fallback baked into the guard below when the cubic degenerates.
    with np.errstate(all="ignore"):
        quad = a_lo - 0.5 * g_lo * d * d / (f_hi - f_lo - g_lo * d)
    lo, hi = min(a_lo, a_hi), max(a_lo, a_hi)
    span = hi - lo
    if not np.isfinite(quad) or quad <= lo + 0.05 * span or quad >= hi - 0.05 * span:
        return 0.5 * (a_lo + a_hi)
    return quad


def _line_search(evaluator, x, f0, g0, direction):
    """Strong Wolfe search along `direction`; returns (alpha, x1, f1, g1) or None."""
    slope0 = float(g0 @ direction)
    if slope0 >= 0.0:
        return None

    def probe(alpha):
        x1 = x + alpha * direction
        f1, g1 = _checked(evaluator, x1)
        return x1, f1, g1, float(g1 @ direction)

    def zoom(a_lo, f_lo, s_lo, a_hi, f_hi, best):
        for _ in range(_LINESEARCH_MAX_ZOOM):
            alpha = _cubic_step(a_lo, f_lo, s_lo, a_hi, f_hi)
            if abs(a_hi - a_lo) * max(abs(slope0), 1.0) < 1e-16:
                return best
            x1, f1, g1, s1 = probe(alpha)
            if f1 > f0 + WOLFE_SUFFICIENT_DECREASE * alpha * slope0 or f1 >= f_lo:
                a_hi, f_hi = alpha, f1
                continue
            best = (alpha, x1, f1, g1)
            if abs(s1) <= -WOLFE_CURVATURE * slope0:
                return best
            if s1 * (a_hi - a_lo) >= 0.0:
                a_hi, f_hi = a_lo, f_lo
            a_lo, f_lo, s_lo = alpha, f1, s1
        return best

    alpha_prev, f_prev, s_prev = 0.0, f0, slope0
    alpha = 1.0
    for _ in range(_LINESEARCH_MAX_EXPANSIONS):
        x1, f1, g1, s1 = probe(alpha)
        if f1 > f0 + WOLFE_SUFFICIENT_DECREASE * alpha * slope0 or (
            alpha_prev > 0.0 and f1 >= f_prev
        ):
            return zoom(alpha_prev, f_prev, s_prev, alpha, f1, None)
        if abs(s1) <= -WOLFE_CURVATURE * slope0:
            return alpha, x1, f1, g1
        if s1 >= 0.0:
            return zoom(alpha, f1, s1, alpha_prev, f_prev, (alpha, x1, f1, g1))
        alpha_prev, f_prev, s_prev = alpha, f1, s1
        alpha *= 2.0
    return None


def minimize(evaluator, x0, options: SolverOptions = None):
    """Minimize `evaluator` (returning value and gradient) from x0.

    Returns the final iterate and a trace whose objective values are
    non-increasing across accepted iterations.
    """
    opts = options or SolverOptions()
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise SolverError("non-finite start vector", iterate=x)
    f, g = _checked(evaluator, x)
    trace = SolverTrace()

    if np.max(np.abs(g)) < opts.gradient_tolerance:
        trace.termination = TERMINATION_GRADIENT
        return x, trace

    s_hist: list = []
    y_hist: list = []
    rho_hist: list = []

    for _ in range(opts.max_iterations):
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if y_hist:
            gamma = (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
            q *= gamma
        for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
            b = rho * (y @ q)
            q += (a - b) * s
        direction = -q

        if direction @ g >= 0.0:
            # History went stale; fall back to steepest descent.
            s_hist.clear()
            y_hist.clear()
            rho_hist.clear()
            direction = -g

        result = _line_search(evaluator, x, f, g, direction)
        if result is None:
            trace.termination = TERMINATION_LINESEARCH
            return x, trace
        _, x_new, f_new, g_new = result

        step = x_new - x
        y = g_new - g
        sy = step @ y
        if sy > 1e-12 * np.linalg.norm(step) * np.linalg.norm(y):
            s_hist.append(step)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > opts.memory:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)

        step_len = float(np.linalg.norm(step))
        grad_norm = float(np.max(np.abs(g_new)))
        trace.iterations.append(IterationRecord(f_new, grad_norm, step_len))
        x, f, g = x_new, f_new, g_new

        if grad_norm < opts.gradient_tolerance:
            trace.termination = TERMINATION_GRADIENT
            return x, trace
        if step_len < opts.step_tolerance:
            trace.termination = TERMINATION_STEP
            return x, trace

    trace.termination = TERMINATION_MAX_ITER
    return x, trace
