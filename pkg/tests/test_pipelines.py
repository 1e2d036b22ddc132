import numpy as np
import pytest

from ruledev.errors import ValidationError
from ruledev.objective import Weights, f_energy
from ruledev.pipelines import (
    OuterOptions,
    TERMINATION_REGRESSION,
    fit_fixed_boundary,
    fit_relaxed,
    gen_strip,
    initial_interpolation,
    subdivide_rulings,
)
from ruledev.splines import centripetal_params, evaluate_curve, evaluate_many, interpolate
from ruledev.surface import Ruling, RulingSequence, strip_planarity_defect

from conftest import random_curve


def terminal_deviation(result, rulings):
    return max(
        np.linalg.norm(evaluate_curve(result.surface.c0, 0.0) - rulings[0].q),
        np.linalg.norm(evaluate_curve(result.surface.c1, 0.0) - rulings[0].p),
        np.linalg.norm(evaluate_curve(result.surface.c0, 1.0) - rulings[-1].q),
        np.linalg.norm(evaluate_curve(result.surface.c1, 1.0) - rulings[-1].p),
    )


def trace_betas(result):
    return [it.beta_max for it in result.outer_trace]


class TestGenStrip:
    def test_planar_is_coplanar_and_fits_flat(self):
        seq = gen_strip("planar", 6, seed=3)
        assert np.abs(strip_planarity_defect(seq)).max() == 0.0
        result = fit_relaxed(seq)
        assert result.metrics.beta_max < 1e-6

    def test_cylinder_parallel_equal_length(self):
        seq = gen_strip("cylinder", 10, seed=5)
        dirs = np.array([r.p - r.q for r in seq])
        lengths = np.linalg.norm(dirs, axis=1)
        assert np.allclose(lengths, lengths[0], atol=1e-12)
        units = dirs / lengths[:, None]
        assert np.abs(units - units[0]).max() < 1e-12

    def test_cone_rulings_coplanar_pairs(self):
        seq = gen_strip("cone", 8, seed=2)
        assert np.abs(strip_planarity_defect(seq)).max() < 1e-15

    def test_coplanar_chain_defects(self):
        for seed in range(5):
            seq = gen_strip("coplanar-chain", 10, seed=seed)
            assert np.abs(strip_planarity_defect(seq)).max() < 1e-12

    def test_perturbed_zero_noise_identity(self):
        a = gen_strip("coplanar-chain", 7, seed=11)
        b = gen_strip("perturbed", 7, perturbation=0.0, seed=11)
        assert a == b

    def test_perturbed_adds_noise(self):
        a = gen_strip("coplanar-chain", 7, seed=11)
        b = gen_strip("perturbed", 7, perturbation=0.05, seed=11)
        assert a != b
        assert np.abs(strip_planarity_defect(b)).max() > 1e-6

    def test_deterministic(self):
        a = gen_strip("perturbed", 9, perturbation=0.02, seed=4)
        b = gen_strip("perturbed", 9, perturbation=0.02, seed=4)
        assert a == b

    def test_validation(self):
        with pytest.raises(ValidationError):
            gen_strip("moebius", 5)
        with pytest.raises(ValidationError):
            gen_strip("planar", 0)
        with pytest.raises(ValidationError):
            gen_strip("planar", 5, perturbation=-0.1)


class TestSubdivide:
    def test_midpoints_inserted(self):
        seq = gen_strip("coplanar-chain", 4, seed=0)
        fine = subdivide_rulings(seq, 1)
        assert len(fine) == 2 * len(seq) - 1
        assert fine[0] == seq[0]
        assert fine[-1] == seq[-1]

    def test_planarity_preserved(self):
        seq = gen_strip("coplanar-chain", 6, seed=1)
        fine = subdivide_rulings(seq, 2)
        assert np.abs(strip_planarity_defect(fine)).max() < 1e-12


class TestFitFixedBoundary:
    def make_planar(self):
        x = np.linspace(0, 2, 6)
        q = np.stack([x, 0.3 * np.sin(x), np.zeros_like(x)], axis=1)
        c0 = interpolate(q, centripetal_params(q))
        rulings = RulingSequence(tuple(
            Ruling(qi, qi + np.array([0.1, 0.9, 0.0])) for qi in q
        ))
        return c0, rulings

    def test_planar_inputs_stay_planar(self):
        c0, rulings = self.make_planar()
        result = fit_fixed_boundary(c0, rulings)
        assert result.metrics.beta_max < 1e-6
        assert np.abs(np.array(result.surface.c1.control_points)[:, 2]).max() < 1e-9

    def test_cylinder_ground_truth(self):
        x = np.linspace(0, 1.6, 8)
        pts = np.stack([x, 0.35 * np.sin(x), 0.2 * x], axis=1)
        c0 = interpolate(pts, centripetal_params(pts))
        shift = np.array([0.1, 0.3, 1.2])
        ts = np.linspace(0, 1, 11)
        rulings = RulingSequence(tuple(
            Ruling(evaluate_curve(c0, t), evaluate_curve(c0, t) + shift) for t in ts
        ))
        result = fit_fixed_boundary(c0, rulings)
        assert result.metrics.beta_max < 0.5
        assert result.metrics.d_max < 1e-3

    def test_k1_energy_regularization_effect(self, rng):
        c0 = random_curve(rng, n_points=7, scale=0.35)
        p0 = evaluate_curve(c0, 0.0) + np.array([0.2, -0.1, 1.0])
        p1 = evaluate_curve(c0, 1.0) + np.array([-0.1, 0.25, 1.1])
        rulings = RulingSequence((Ruling(evaluate_curve(c0, 0.0), p0),
                                  Ruling(evaluate_curve(c0, 1.0), p1)))
        with_energy = fit_fixed_boundary(
            c0, rulings, weights=Weights(lambda_energy=0.001, lambda_width=1e-5))
        without = fit_fixed_boundary(
            c0, rulings, weights=Weights(lambda_energy=0.0, lambda_width=1e-5))
        assert f_energy(with_energy.surface.c1) <= f_energy(without.surface.c1) + 1e-9
        assert np.isfinite(with_energy.metrics.beta_max)

    def test_precondition_lists_offenders(self, rng):
        c0 = random_curve(rng)
        rulings = RulingSequence((
            Ruling(evaluate_curve(c0, 0.0), evaluate_curve(c0, 0.0) + [0, 0, 1.0]),
            Ruling(np.array([50.0, 50.0, 50.0]), np.array([50.0, 50.0, 51.0])),
            Ruling(evaluate_curve(c0, 1.0), evaluate_curve(c0, 1.0) + [0, 0, 1.0]),
        ))
        with pytest.raises(ValidationError) as err:
            fit_fixed_boundary(c0, rulings)
        assert "1" in str(err.value)

    def test_terminal_constraint(self):
        c0, rulings = self.make_planar()
        result = fit_fixed_boundary(c0, rulings)
        assert terminal_deviation(result, rulings) < 1e-12


class TestFitRelaxed:
    def test_cylinder_recovery(self):
        seq = gen_strip("cylinder", 10, seed=1)
        result = fit_relaxed(seq)
        assert result.metrics.beta_max < 0.5
        assert result.closeness_residual < 1e-6
        assert result.outer_iterations <= 2

    def test_cone_recovery(self):
        seq = gen_strip("cone", 10, seed=1)
        result = fit_relaxed(seq)
        assert result.metrics.beta_max < 0.5
        assert result.closeness_residual < 1e-6
        assert result.outer_iterations <= 2

    def test_coplanar_chain_quality(self):
        seq = gen_strip("coplanar-chain", 10, seed=1)
        result = fit_relaxed(seq)
        assert result.metrics.beta_max <= 6.0
        assert result.metrics.d_max <= 0.03

    def test_two_ruling_degenerate_case(self):
        rulings = RulingSequence((Ruling([0, 0, 0], [0, 1, 0.2]),
                                  Ruling([1, 0.2, 0.4], [1.1, 1.2, 0.1])))
        result = fit_relaxed(rulings)
        assert result.closeness_residual == 0.0
        assert np.isfinite(result.metrics.beta_max)
        assert terminal_deviation(result, rulings) < 1e-12

    def test_terminal_constraint(self):
        seq = gen_strip("perturbed", 8, perturbation=0.05, seed=7)
        result = fit_relaxed(seq)
        assert terminal_deviation(result, seq) < 1e-12

    def test_outer_beta_non_increasing_until_termination(self):
        seq = gen_strip("perturbed", 10, perturbation=0.03, seed=2)
        result = fit_relaxed(seq)
        betas = trace_betas(result)
        interior = np.diff(betas)[:-1] if result.termination == TERMINATION_REGRESSION \
            else np.diff(betas)
        assert np.all(interior <= 1e-9)

    def test_best_iterate_reported(self):
        seq = gen_strip("perturbed", 10, perturbation=0.03, seed=2)
        result = fit_relaxed(seq)
        assert result.metrics.beta_max <= min(trace_betas(result)) + 1e-9

    def test_outer_cap_respected(self):
        seq = gen_strip("perturbed", 10, perturbation=0.05, seed=3)
        result = fit_relaxed(seq, outer=OuterOptions(max_outer=2))
        assert result.outer_iterations <= 2

    def test_exact_developable_beta_below_half_degree(self):
        for kind in ("cylinder", "cone"):
            seq = gen_strip(kind, 8, seed=9)
            result = fit_relaxed(seq)
            assert result.metrics.beta_max < 0.5, kind


class TestRelaxedDominatesFixed:
    def test_shared_input_ordering(self):
        seq = gen_strip("perturbed", 10, perturbation=0.04, seed=1)
        c0, _, _ = initial_interpolation(seq)
        fixed = fit_fixed_boundary(
            c0, seq, weights=Weights(lambda_energy=1e-5, lambda_width=1e-5,
                                     lambda_interior=1.0))
        relaxed = fit_relaxed(
            seq, weights=Weights(lambda_energy=1e-5, lambda_width=1e-5,
                                 lambda_closeness=1.0))
        assert relaxed.metrics.beta_max <= fixed.metrics.beta_max


class TestInitialInterpolation:
    def test_curves_hit_ruling_endpoints(self):
        seq = gen_strip("coplanar-chain", 6, seed=4)
        c0, c1, t = initial_interpolation(seq)
        assert np.abs(evaluate_many(c0, t.params) - seq.q_points).max() < 1e-9
        assert np.abs(evaluate_many(c1, t.params) - seq.p_points).max() < 1e-9

    def test_short_sequences_fall_back_to_segments(self):
        rulings = RulingSequence((Ruling([0, 0, 0], [0, 1, 0]),
                                  Ruling([1, 0, 0], [1, 1, 0])))
        c0, c1, _ = initial_interpolation(rulings)
        assert c0.degree == 3
        assert c0.n_ctrl == 4
        probes = evaluate_many(c0, np.linspace(0, 1, 9))
        assert np.abs(probes[:, 1:]).max() < 1e-12
