import numpy as np
import pytest

from ruledev.splines import SplineCurve, centripetal_params, interpolate, line_curve


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_curve(rng, n_points=7, degree=3, scale=0.4):
    """Interpolated curve through a random smooth-ish point walk."""
    pts = np.cumsum(rng.normal(0.0, scale, size=(n_points, 3)), axis=0)
    return interpolate(pts, centripetal_params(pts), degree)


def bilinear_patch():
    """The surface S(t, s) = (t, s, t*s), built from two exact line curves."""
    from ruledev.surface import RuledSurface

    return RuledSurface(line_curve([0, 0, 0], [1, 0, 0]),
                        line_curve([0, 1, 0], [1, 1, 1]))


def adaptive_simpson(f, a, b, tol=1e-12, max_depth=40):
    """Classic recursive Simpson quadrature with Richardson correction."""

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth >= max_depth or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


def rotation_matrix(axis, angle):
    ax = np.asarray(axis, dtype=float)
    ax = ax / np.linalg.norm(ax)
    c, s = np.cos(angle), np.sin(angle)
    k = np.array([[0, -ax[2], ax[1]], [ax[2], 0, -ax[0]], [-ax[1], ax[0], 0]])
    return np.eye(3) * c + s * k + (1 - c) * np.outer(ax, ax)


def rotate_curve(curve: SplineCurve, rot, shift) -> SplineCurve:
    return curve.with_control_points(curve.control_points @ rot.T + shift)
