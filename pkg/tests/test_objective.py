import numpy as np
import pytest

from ruledev.errors import DegenerateGeometryError, ValidationError
from ruledev.objective import (
    MODE_FIXED,
    MODE_RELAXED,
    NormalField,
    OptimizationProblem,
    Weights,
    assemble,
    f_closeness,
    f_dev,
    f_energy,
    f_interior,
    f_width,
    init_normals,
)
from ruledev.splines import evaluate_curve, line_curve
from ruledev.surface import RuledSurface, Ruling, RulingSequence, surface_normal

from conftest import adaptive_simpson, bilinear_patch, random_curve, rotate_curve, rotation_matrix


def planar_surface():
    return RuledSurface(line_curve([0, 0, 0], [1, 0.3, 0]),
                        line_curve([0, 1, 0], [1.1, 1.4, 0]))


def make_problem(rng, mode, literal=False, m=10, weights=None):
    c0 = random_curve(rng)
    c1 = random_curve(rng)
    params = np.array([0.2, 0.45, 0.8])
    q = rng.normal(size=(3, 3))
    p = rng.normal(size=(3, 3))
    w = weights or Weights(lambda_energy=0.01, lambda_width=0.1,
                           lambda_interior=1.0, lambda_closeness=1.0)
    return OptimizationProblem(mode, c0, c1, np.linspace(0, 1, m + 1), w,
                               interior_params=params, interior_q=q, interior_p=p,
                               literal_closeness=literal)


class TestDevTerm:
    def test_planar_surface_with_plane_normals(self):
        surface = planar_surface()
        t = np.linspace(0, 1, 9)
        normals = NormalField(t, np.tile([0.0, 0.0, 1.0], (9, 1)))
        assert f_dev(surface, normals) < 1e-12

    def test_zero_normals_reach_trivial_zero(self):
        # the degenerate minimum that makes the unit-norm penalty mandatory
        surface = bilinear_patch()
        normals = NormalField(np.linspace(0, 1, 5), np.zeros((5, 3)))
        assert f_dev(surface, normals) == 0.0

    def test_direct_summation_oracle(self):
        surface = bilinear_patch()
        normals = init_normals(surface, 4)
        total = 0.0
        for tk, nk in zip(normals.params, normals.vectors):
            d0 = evaluate_curve(surface.c0, tk, 1) @ nk
            d1 = evaluate_curve(surface.c1, tk, 1) @ nk
            w = (evaluate_curve(surface.c0, tk) - evaluate_curve(surface.c1, tk)) @ nk
            total += d0 * d0 + d1 * d1 + w * w
        assert abs(f_dev(surface, normals) - total) < 1e-10


class TestEnergyTerm:
    def test_straight_line_zero(self):
        assert f_energy(line_curve([0, 0, 0], [1, 0.5, 0.3], n_ctrl=7)) < 1e-12

    def test_quadratic_homogeneity(self, rng):
        curve = random_curve(rng)
        scaled = curve.with_control_points(3.7 * np.array(curve.control_points))
        assert abs(f_energy(scaled) - 3.7**2 * f_energy(curve)) < 1e-8 * f_energy(scaled)

    def test_adaptive_simpson_oracle(self, rng):
        curve = random_curve(rng, n_points=5)
        oracle = adaptive_simpson(
            lambda t: float(np.sum(evaluate_curve(curve, t, 2) ** 2)), 0.0, 1.0
        )
        assert abs(f_energy(curve) - oracle) < 1e-8

    def test_degree_one_rejected(self):
        pts = np.array([[0.0, 0, 0], [1.0, 0, 0]])
        from ruledev.splines import interpolate

        with pytest.raises(ValidationError):
            f_energy(interpolate(pts, [0.0, 1.0], degree=1))


class TestWidthTerm:
    def test_constant_width_zero(self, rng):
        c0 = random_curve(rng)
        c1 = c0.with_control_points(c0.control_points + np.array([0, 0, 2.0]))
        assert f_width(RuledSurface(c0, c1), np.linspace(0, 1, 30)) < 1e-12

    def test_two_sample_arithmetic(self):
        surface = RuledSurface(line_curve([0, 0, 0], [1, 0, 0]),
                               line_curve([0, 1, 0], [1, 2, 0]))
        assert abs(f_width(surface, [0.0, 1.0]) - 9.0) < 1e-12

    def test_direct_summation_oracle(self):
        surface = RuledSurface(line_curve([0, 0, 0], [1, 0, 0]),
                               line_curve([0, 1, 0], [1, 1.8, 0]))
        params = np.linspace(0, 1, 100)
        widths = []
        for t in params:
            d = evaluate_curve(surface.c0, t) - evaluate_curve(surface.c1, t)
            widths.append(float(d @ d))
        oracle = sum((widths[j] - widths[j + 1]) ** 2 for j in range(99))
        assert abs(f_width(surface, params) - oracle) < 1e-10


class TestInteriorTerm:
    def test_targets_on_curve(self, rng):
        curve = random_curve(rng)
        params = np.array([0.3, 0.6])
        targets = np.array([evaluate_curve(curve, t) for t in params])
        assert f_interior(curve, targets, params) < 1e-25

    def test_single_displaced_target(self, rng):
        curve = random_curve(rng)
        target = evaluate_curve(curve, 0.4) + np.array([0, 0, 0.25])
        assert abs(f_interior(curve, [target], [0.4]) - 0.25**2) < 1e-14

    def test_direct_summation_oracle(self, rng):
        curve = random_curve(rng)
        params = np.array([0.2, 0.5, 0.9])
        targets = rng.normal(size=(3, 3))
        oracle = sum(
            float(np.sum((evaluate_curve(curve, t) - x) ** 2))
            for t, x in zip(params, targets)
        )
        assert abs(f_interior(curve, targets, params) - oracle) < 1e-12


class TestClosenessTerm:
    def make(self, rng):
        surface = RuledSurface(random_curve(rng), random_curve(rng))
        params = np.array([0.0, 0.35, 0.75, 1.0])
        rulings = RulingSequence(tuple(
            Ruling(rng.normal(size=3), rng.normal(size=3)) for _ in params
        ))
        return surface, rulings, params[1:-1]

    def test_endpoints_on_curves(self, rng):
        surface = RuledSurface(random_curve(rng), random_curve(rng))
        params = np.array([0.0, 0.4, 1.0])
        rulings = RulingSequence(tuple(
            Ruling(evaluate_curve(surface.c0, t), evaluate_curve(surface.c1, t))
            for t in params
        ))
        assert f_closeness(surface, rulings, params[1:-1]) < 1e-25

    def test_symmetric_displacement(self, rng):
        surface = RuledSurface(random_curve(rng), random_curve(rng))
        t = 0.5
        d = 0.3
        q = evaluate_curve(surface.c0, t) + np.array([d, 0, 0])
        p = evaluate_curve(surface.c1, t) + np.array([0, d, 0])
        rulings = RulingSequence((
            Ruling(evaluate_curve(surface.c0, 0.0), evaluate_curve(surface.c1, 0.0)),
            Ruling(q, p),
            Ruling(evaluate_curve(surface.c0, 1.0), evaluate_curve(surface.c1, 1.0)),
        ))
        assert abs(f_closeness(surface, rulings, [t]) - 2 * d * d) < 1e-12

    def test_direct_summation_oracle(self, rng):
        surface, rulings, params = self.make(rng)
        q = rulings.q_points[1:-1]
        p = rulings.p_points[1:-1]
        oracle = 0.0
        literal_oracle = 0.0
        for t, qi, pi in zip(params, q, p):
            e0 = float(np.sum((evaluate_curve(surface.c0, t) - qi) ** 2))
            e1 = float(np.sum((evaluate_curve(surface.c1, t) - pi) ** 2))
            oracle += e0 + e1
            literal_oracle += (e1 + np.sqrt(e0)) ** 2
        assert abs(f_closeness(surface, rulings, params) - oracle) < 1e-12
        assert abs(f_closeness(surface, rulings, params, literal=True) - literal_oracle) < 1e-12


class TestInitNormals:
    def test_planar(self):
        surface = planar_surface()
        field = init_normals(surface, 6)
        assert np.allclose(np.abs(field.vectors[:, 2]), 1.0, atol=1e-12)

    def test_cylinder_matches_surface_normal(self, rng):
        c0 = random_curve(rng)
        c1 = c0.with_control_points(c0.control_points + np.array([0.3, 0.1, 1.9]))
        surface = RuledSurface(c0, c1)
        field = init_normals(surface, 8)
        for t, n in zip(field.params, field.vectors):
            assert np.allclose(n, surface_normal(surface, t, 0.0), atol=1e-12)

    def test_bilinear_vector_mean_oracle(self):
        surface = bilinear_patch()
        field = init_normals(surface, 4)
        n0 = np.array([0, -0.5, 1.0])
        n0 /= np.linalg.norm(n0)
        n1 = np.array([-1, -0.5, 1.0])
        n1 /= np.linalg.norm(n1)
        mean = 0.5 * (n0 + n1)
        mean /= np.linalg.norm(mean)
        assert np.allclose(field.vectors[2], mean, atol=1e-12)

    def test_degenerate_sample_uses_neighbor(self):
        # curves cross at t=0.5; with M=2 the middle sample is degenerate
        surface = RuledSurface(line_curve([0, 0, 0], [1, 0, 0]),
                               line_curve([0, 1, 0], [1, -1, 0]))
        field = init_normals(surface, 2)
        assert np.allclose(field.vectors[1], field.vectors[0], atol=0)

    def test_all_degenerate_rejected(self, rng):
        c0 = random_curve(rng)
        with pytest.raises(DegenerateGeometryError):
            init_normals(RuledSurface(c0, c0), 4)


class TestAssemble:
    def test_weight_gating_value_equals_dev(self, rng):
        problem = make_problem(rng, MODE_RELAXED,
                               weights=Weights(lambda_unit=1.0))
        ev = assemble(problem)
        surface = RuledSurface(problem.c0, problem.c1)
        normals = init_normals(surface, 10).normalized()
        x = ev.initial_vector(normals)
        value, _ = ev(x)
        # unit normals leave the unit penalty at zero
        assert abs(value - f_dev(surface, normals)) < 1e-10

    def test_interior_targets_on_curve_contribute_zero(self, rng):
        c0 = random_curve(rng)
        c1 = random_curve(rng)
        params = np.array([0.3, 0.7])
        targets = np.array([evaluate_curve(c1, t) for t in params])
        problem = OptimizationProblem(
            MODE_FIXED, c0, c1, np.linspace(0, 1, 11),
            Weights(lambda_interior=1.0), interior_params=params, interior_p=targets,
        )
        ev = assemble(problem)
        x = ev.initial_vector(init_normals(RuledSurface(c0, c1), 10))
        assert ev.terms(x)["interior"] < 1e-25

    @pytest.mark.parametrize("mode,literal", [
        (MODE_FIXED, False), (MODE_RELAXED, False), (MODE_RELAXED, True),
    ])
    def test_gradient_matches_finite_differences(self, rng, mode, literal):
        problem = make_problem(rng, mode, literal=literal)
        ev = assemble(problem)
        normals = init_normals(RuledSurface(problem.c0, problem.c1), 10)
        x = ev.initial_vector(normals) + rng.normal(0, 0.05, ev.n_variables)
        _, grad = ev(x)
        h = 1e-6
        for i in range(len(x)):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fd = (ev.value(xp) - ev.value(xm)) / (2 * h)
            if abs(fd) < 1e-10:
                continue
            assert abs(grad[i] - fd) / max(abs(fd), 1e-10) < 1e-5

    def test_dev_quadratic_in_control_points(self, rng):
        # with normals frozen, the developability term is a quadratic form
        problem = make_problem(rng, MODE_RELAXED)
        ev = assemble(problem)
        normals = init_normals(RuledSurface(problem.c0, problem.c1), 10)
        x0 = ev.initial_vector(normals)
        direction = rng.normal(size=ev.n_variables)
        direction[-3 * 11:] = 0.0  # freeze the normal block
        samples = []
        for alpha in (0.0, 0.5, 1.0):
            samples.append(ev.terms(x0 + alpha * direction)["dev"])
        # fit a parabola through the three samples and test a fourth point
        f0, f05, f1 = samples
        a = 2 * f1 - 4 * f05 + 2 * f0
        b = -f1 + 4 * f05 - 3 * f0
        predicted = a * 0.75**2 + b * 0.75 + f0
        actual = ev.terms(x0 + 0.75 * direction)["dev"]
        assert abs(predicted - actual) < 1e-9 * max(1.0, abs(actual))

    def test_rigid_motion_equivariance(self, rng):
        problem = make_problem(rng, MODE_RELAXED)
        ev = assemble(problem)
        normals = init_normals(RuledSurface(problem.c0, problem.c1), 10)
        x = ev.initial_vector(normals) + rng.normal(0, 0.03, ev.n_variables)
        terms = ev.terms(x)

        rot = rotation_matrix([0.2, 1.0, -0.7], 0.9)
        shift = np.array([2.0, -1.0, 0.5])
        cp0, cp1, nvec = ev.split(x)
        moved = OptimizationProblem(
            MODE_RELAXED,
            rotate_curve(problem.c0.with_control_points(cp0), rot, shift),
            rotate_curve(problem.c1.with_control_points(cp1), rot, shift),
            problem.normal_params, problem.weights,
            interior_params=problem.interior_params,
            interior_q=problem.interior_q @ rot.T + shift,
            interior_p=problem.interior_p @ rot.T + shift,
        )
        ev2 = assemble(moved)
        x2 = ev2.initial_vector(NormalField(problem.normal_params, nvec @ rot.T))
        terms2 = ev2.terms(x2)
        for key in terms:
            assert abs(terms[key] - terms2[key]) < 1e-10 * max(1.0, abs(terms[key]))

    def test_layout_mismatch_rejected(self, rng):
        problem = make_problem(rng, MODE_RELAXED)
        ev = assemble(problem)
        with pytest.raises(ValidationError):
            ev.value(np.zeros(ev.n_variables + 1))

    def test_interior_alignment_validated(self, rng):
        c0, c1 = random_curve(rng), random_curve(rng)
        with pytest.raises(ValidationError):
            OptimizationProblem(
                MODE_RELAXED, c0, c1, np.linspace(0, 1, 5), Weights(),
                interior_params=np.array([0.5]), interior_q=np.zeros((2, 3)),
                interior_p=np.zeros((1, 3)),
            )

    def test_nonnegative_terms(self, rng):
        problem = make_problem(rng, MODE_RELAXED)
        ev = assemble(problem)
        normals = init_normals(RuledSurface(problem.c0, problem.c1), 10)
        x = ev.initial_vector(normals) + rng.normal(0, 0.2, ev.n_variables)
        for key, value in ev.terms(x).items():
            assert value >= 0.0, key


class TestWeights:
    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            Weights(lambda_energy=-1.0)

    def test_mode_defaults(self):
        fixed = Weights.for_fixed_boundary()
        relaxed = Weights.for_relaxed()
        assert fixed.lambda_energy == 0.001
        assert fixed.lambda_interior == 1.0
        assert relaxed.lambda_energy == 0.00001
        assert relaxed.lambda_width == 0.00001
        assert relaxed.lambda_closeness == 1.0


class TestNormalField:
    def test_param_validation(self):
        with pytest.raises(ValidationError):
            NormalField(np.array([0.0, 0.4, 0.9]), np.zeros((3, 3)))

    def test_normalized(self):
        field = NormalField(np.array([0.0, 1.0]), np.array([[0, 0, 2.0], [3.0, 0, 0]]))
        unit = field.normalized()
        assert np.allclose(np.linalg.norm(unit.vectors, axis=1), 1.0, atol=0)
