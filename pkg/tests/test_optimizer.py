import numpy as np
import pytest

from ruledev.errors import SolverError, ValidationError
from ruledev.optimizer import (
    SolverOptions,
    TERMINATION_GRADIENT,
    TERMINATION_LINESEARCH,
    minimize,
)


def quadratic_at(center):
    center = np.asarray(center, dtype=float)

    def f(x):
        d = x - center
        return float(d @ d), 2.0 * d

    return f


def rosenbrock(x):
    a, b = x
    value = (1 - a) ** 2 + 100 * (b - a * a) ** 2
    grad = np.array([-2 * (1 - a) - 400 * a * (b - a * a), 200 * (b - a * a)])
    return float(value), grad


class TestMinimize:
    def test_convex_quadratic_exact(self):
        center = np.array([1.0, -2.0, 3.5, 0.25])
        x, trace = minimize(quadratic_at(center), np.zeros(4))
        assert np.abs(x - center).max() < 1e-8
        assert trace.termination == TERMINATION_GRADIENT

    def test_rosenbrock_standard_benchmark(self):
        x, trace = minimize(rosenbrock, np.array([-1.2, 1.0]))
        assert np.abs(x - 1.0).max() < 1e-6
        assert np.all(np.diff(trace.values) <= 0)

    def test_stationary_start_returns_immediately(self):
        center = np.array([2.0, -1.0])
        x, trace = minimize(quadratic_at(center), center.copy())
        assert len(trace.iterations) == 0
        assert trace.termination == TERMINATION_GRADIENT
        assert np.array_equal(x, center)

    def test_monotone_non_increase(self):
        _, trace = minimize(rosenbrock, np.array([3.0, -3.0]))
        values = trace.values
        assert np.all(np.diff(values) <= 0)

    def test_final_value_never_above_start(self):
        f = rosenbrock
        x0 = np.array([-1.2, 1.0])
        x, _ = minimize(f, x0)
        assert f(x)[0] <= f(x0)[0]

    def test_scale_sanity(self):
        center = np.array([0.5, -0.5, 2.0])

        def scaled(x):
            value, grad = quadratic_at(center)(x)
            return 10.0 * value, 10.0 * grad

        x1, _ = minimize(quadratic_at(center), np.zeros(3))
        x2, _ = minimize(scaled, np.zeros(3))
        assert np.abs(x1 - x2).max() < 1e-6

    def test_deterministic_traces(self):
        x1, t1 = minimize(rosenbrock, np.array([-1.2, 1.0]))
        x2, t2 = minimize(rosenbrock, np.array([-1.2, 1.0]))
        assert np.array_equal(x1, x2)
        assert [r.value for r in t1.iterations] == [r.value for r in t2.iterations]

    def test_iteration_cap(self):
        opts = SolverOptions(max_iterations=3)
        _, trace = minimize(rosenbrock, np.array([-1.2, 1.0]), opts)
        assert len(trace.iterations) == 3
        assert trace.termination == "max-iterations"

    def test_non_finite_value_raises_with_iterate(self):
        def bad(x):
            return float("nan"), np.zeros_like(x)

        with pytest.raises(SolverError) as err:
            minimize(bad, np.array([1.0, 2.0]))
        assert np.array_equal(err.value.iterate, [1.0, 2.0])

    def test_line_search_failure_reported(self):
        # unbounded linear descent never satisfies the curvature condition
        def linear(x):
            return float(-x[0]), np.array([-1.0])

        x, trace = minimize(linear, np.array([0.0]))
        assert trace.termination == TERMINATION_LINESEARCH
        assert linear(x)[0] <= 0.0

    def test_options_validated(self):
        with pytest.raises(ValidationError):
            SolverOptions(memory=0)
        with pytest.raises(ValidationError):
            SolverOptions(gradient_tolerance=0.0)
