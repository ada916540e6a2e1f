import math

import numpy as np
from django.test import SimpleTestCase

from drift.spec import DriftSpec
from skeleton.control import Control
from skeleton.factories import DynamicsFactory, LinearModeDynamicsFactory
from skeleton.solver import integrate_skeleton
from spectral.factories import GridFactory
from spectral.grid import Field
from .oracles import (
    contraction_factor, discrete_gramian, discrete_optimal_control, gaussian_tail, gramian,
    minimal_action, optimal_control, oscillatory_response,
)
from .verifiers import (
    moment_bound_experiment, moment_functional, random_energy_ball_controls,
    solution_map_experiment, tail_experiment, weak_convergence_experiment,
)


def bump(grid, amplitude=1.0):
    return Field.from_function(grid, lambda x: amplitude * np.exp(-x ** 2))


class OracleTest(SimpleTestCase):
    """Test cases for the closed-form linear-mode oracles"""

    def test_gramian(self):
        """Test W(T) for a = 3/2, c = 1, T = 1 and the a = 0 limit"""
        self.assertAlmostEqual(gramian(1.0, 1.5, 1.0), (1.0 - math.exp(-3.0)) / 3.0, places=12)
        self.assertAlmostEqual(gramian(2.0, 0.0, 0.5), 2.0, places=12)
        self.assertAlmostEqual(minimal_action(1.0, gramian(1.0, 1.5, 1.0)), 1.578594, places=6)

    def test_discrete_gramian_converges(self):
        """Test the discrete Gramian approaches W(T) as dt -> 0"""
        continuous = gramian(1.0, 1.5, 1.0)
        coarse = abs(discrete_gramian(1.0, 1.0, 0.5, 1 / 100, 100) - continuous)
        fine = abs(discrete_gramian(1.0, 1.0, 0.5, 1 / 400, 400) - continuous)
        self.assertLess(fine, coarse)
        self.assertLess(fine / continuous, 1e-2)

    def test_discrete_optimal_control_hits_target(self):
        """Test the discrete minimum-energy control reaches x with energy x^2 / W_d"""
        dt, steps = 0.01, 100
        v = discrete_optimal_control(1.0, 1.0, 0.5, dt, steps, 2.0)
        rho = contraction_factor(1.0, 0.5, dt)
        x = 0.0
        for vm in v:
            x = math.exp(-dt) * ((1.0 - 0.5 * dt) * x + dt * vm)
        self.assertAlmostEqual(x, 2.0, places=10)
        self.assertAlmostEqual(dt * np.sum(v ** 2), 4.0 / discrete_gramian(1.0, 1.0, 0.5, dt, steps), places=10)
        self.assertLess(rho, 1.0)

    def test_optimal_control_shape(self):
        """Test v*(T) = c x / W and the exponential profile"""
        self.assertAlmostEqual(optimal_control(1.0, 1.0, 1.5, 1.0, 1.0), 1.0 / gramian(1.0, 1.5, 1.0))
        ratio = optimal_control(0.0, 1.0, 1.5, 1.0, 1.0) / optimal_control(1.0, 1.0, 1.5, 1.0, 1.0)
        self.assertAlmostEqual(ratio, math.exp(-1.5))

    def test_gaussian_tail(self):
        self.assertAlmostEqual(gaussian_tail(0.0, 2.0), 0.5)
        self.assertAlmostEqual(gaussian_tail(1.96, 1.0), 0.0249979, places=6)

    def test_oscillatory_response(self):
        """Test the closed form solves X' = -a X + c A sin(w t) with X(0) = 0"""
        t = np.linspace(0.0, 2.0, 2001)
        x = oscillatory_response(t, 1.0, 2.0, 1.5, 7.0)
        self.assertEqual(x[0], 0.0)
        derivative = np.gradient(x, t)
        residual = derivative - (-1.5 * x + 2.0 * np.sin(7.0 * t))
        self.assertLess(np.max(np.abs(residual[1:-1])), 1e-3)


class EnergyBallTest(SimpleTestCase):
    """Test cases for random controls on the energy ball"""

    def test_energy_within_ball(self):
        controls = random_energy_ball_controls(2.0, 20, 50, 4, 0.01, seed=3)
        self.assertEqual(len(controls), 20)
        for control in controls:
            self.assertLessEqual(control.energy, 4.0 * (1 + 1e-12))
            self.assertEqual(control.values.shape, (50, 4))

    def test_reproducible_per_index(self):
        """Test control i does not depend on how many controls are drawn"""
        few = random_energy_ball_controls(1.0, 3, 20, 2, 0.05, seed=9)
        many = random_energy_ball_controls(1.0, 10, 20, 2, 0.05, seed=9)
        for first, second in zip(few, many):
            np.testing.assert_array_equal(first.values, second.values)

    def test_zero_radius(self):
        for control in random_energy_ball_controls(0.0, 3, 10, 1, 0.1, seed=0):
            self.assertEqual(control.energy, 0.0)

    def test_negative_radius(self):
        with self.assertRaises(ValueError):
            random_energy_ball_controls(-1.0, 3, 10, 1, 0.1, seed=0)


class TailExperimentTest(SimpleTestCase):
    """Test cases for uniform tail decay"""

    def test_rest_state_has_no_tail(self):
        """Test u0 = 0, v = 0, g = 0 gives zero tail mass"""
        dynamics = LinearModeDynamicsFactory(dt=0.01, steps=50)
        result = tail_experiment(dynamics, Field.zeros(dynamics.grid), 0.0, (1.0, 2.0), 5, seed=0)
        self.assertTrue(all(row['worst_tail_mass'] == 0.0 for row in result.rows))
        self.assertTrue(result.passed)

    def test_localized_data_decay(self):
        """Test the worst tail mass decreases in m for localized data and noise"""
        grid = GridFactory(half_width=8.0, points=128)
        dynamics = DynamicsFactory(grid=grid, dt=0.01, steps=50)
        result = tail_experiment(dynamics, bump(grid), 1.0, (1.0, 2.0, 4.0, 6.0), 10, seed=1, tail_tolerance=1.0)
        worst = [row['worst_tail_mass'] for row in result.rows]
        self.assertTrue(result.passed)
        self.assertGreater(worst[0], worst[-1])
        self.assertEqual(result.summary['blow_ups'], 0)

    def test_doubling_radius(self):
        """Test doubling R quadruples the tail of a linear system started at rest"""
        dynamics = LinearModeDynamicsFactory(dt=0.01, steps=50)
        u0 = Field.zeros(dynamics.grid)
        small = tail_experiment(dynamics, u0, 1.0, (1.0, 2.0), 8, seed=4)
        large = tail_experiment(dynamics, u0, 2.0, (1.0, 2.0), 8, seed=4)
        for first, second in zip(small.rows, large.rows):
            self.assertAlmostEqual(second['worst_tail_mass'] / first['worst_tail_mass'], 4.0, places=9)

    def test_radii_validation(self):
        dynamics = LinearModeDynamicsFactory(dt=0.01, steps=10)
        u0 = Field.zeros(dynamics.grid)
        with self.assertRaises(ValueError):
            tail_experiment(dynamics, u0, 1.0, (2.0, 1.0), 2, seed=0)
        with self.assertRaises(ValueError):
            tail_experiment(dynamics, u0, 1.0, (1.0, 4.0), 2, seed=0)


class WeakConvergenceTest(SimpleTestCase):
    """Test cases for weakly null control perturbations"""

    def test_no_perturbation(self):
        dynamics = LinearModeDynamicsFactory(dt=0.01, steps=100)
        base = Control.zeros(100, 1, 0.01)
        result = weak_convergence_experiment(dynamics, Field.zeros(dynamics.grid), base, 0, 0.0, (1, 2, 4))
        for row in result.rows:
            self.assertEqual(row['sup_l2'], 0.0)
            self.assertEqual(row['v_integral'], 0.0)

    def test_linear_oracle(self):
        """Test the linear-mode distance follows the oscillatory response and decays like 1/n"""
        dynamics = LinearModeDynamicsFactory()
        base = Control.zeros(dynamics.steps, 1, dynamics.dt)
        result = weak_convergence_experiment(dynamics, Field.zeros(dynamics.grid), base, 0, 1.0, (1, 2, 4, 8))
        for row in result.rows:
            omega = 2.0 * np.pi * row['n'] / dynamics.horizon
            expected = np.max(np.abs(oscillatory_response(dynamics.times, 1.0, 1.0, 1.5, omega)))
            self.assertLess(abs(row['sup_l2'] / expected - 1.0), 0.05)
        scaled = [row['n_sup_l2'] for row in result.rows]
        self.assertLess(abs(scaled[-1] / scaled[-2] - 1.0), 0.25)

    def test_nonlinear_signature(self):
        """Test distances shrink over n while the control distance stays fixed"""
        dynamics = DynamicsFactory(dt=1.0 / 400, steps=400)
        base = Control.zeros(dynamics.steps, dynamics.K, dynamics.dt)
        result = weak_convergence_experiment(dynamics, bump(dynamics.grid), base, 0, 1.0, (1, 2, 4, 8, 16, 32))
        self.assertTrue(result.passed, result.verdicts_dict())
        gaps = [row['control_distance'] for row in result.rows]
        self.assertAlmostEqual(gaps[0], math.sqrt(dynamics.horizon / 2.0), places=10)

    def test_unresolved_frequency(self):
        dynamics = LinearModeDynamicsFactory(dt=0.01, steps=20)
        base = Control.zeros(20, 1, 0.01)
        with self.assertRaises(ValueError):
            weak_convergence_experiment(dynamics, Field.zeros(dynamics.grid), base, 0, 1.0, (1, 10))


class MomentBoundTest(SimpleTestCase):
    """Test cases for moment bounds of the shifted equation"""

    def test_deterministic_limit(self):
        """Test v = 0, eps = 0 is the skeleton energy functional"""
        dynamics = DynamicsFactory()
        u0 = bump(dynamics.grid)
        result = moment_bound_experiment(dynamics, u0, 0.0, 3, (0.0,), seed=0)
        expected = moment_functional(integrate_skeleton(u0, Control.zeros(50, dynamics.K, dynamics.dt), dynamics))
        self.assertAlmostEqual(result.rows[0]['mean'], expected, places=12)
        self.assertAlmostEqual(result.rows[0]['std_error'], 0.0, places=12)

    def test_uniform_in_epsilon(self):
        dynamics = DynamicsFactory()
        result = moment_bound_experiment(dynamics, bump(dynamics.grid), 1.0, 50, (0.01, 0.05, 0.1), seed=2)
        self.assertTrue(result.passed, result.summary)
        self.assertEqual([row['blow_ups'] for row in result.rows], [0, 0, 0])

    def test_blow_ups_fail_the_bound(self):
        """Test an epsilon whose runs all blow up fails the verdict"""
        drift = DriftSpec(p=2.0, a=0.0, function=lambda t, u: -u ** 3, derivative=lambda t, u: -3.0 * u ** 2)
        dynamics = DynamicsFactory(drift=drift, dt=0.1, steps=30)
        u0 = Field.constant(dynamics.grid, 10.0)
        result = moment_bound_experiment(dynamics, u0, 0.0, 3, (0.0, 0.1), seed=0)
        self.assertEqual([row['blow_ups'] for row in result.rows], [3, 3])
        self.assertEqual(result.summary['ratio'], float('inf'))
        self.assertFalse(result.passed)

    def test_zero_mean_next_to_positive_fails(self):
        """Test a vanishing mean beside a positive one is not uniform"""
        dynamics = DynamicsFactory()
        result = moment_bound_experiment(dynamics, Field.zeros(dynamics.grid), 0.0, 5, (0.0, 0.1), seed=0)
        self.assertEqual(result.rows[0]['mean'], 0.0)
        self.assertGreater(result.rows[1]['mean'], 0.0)
        self.assertFalse(result.passed)

    def test_larger_data_larger_bound(self):
        dynamics = DynamicsFactory()
        small = moment_bound_experiment(dynamics, bump(dynamics.grid), 0.0, 1, (0.0,), seed=0)
        large = moment_bound_experiment(dynamics, bump(dynamics.grid, 2.0), 0.0, 1, (0.0,), seed=0)
        self.assertGreater(large.rows[0]['mean'], small.rows[0]['mean'])


class SolutionMapTest(SimpleTestCase):
    """Test cases for the Lipschitz bound of the solution map"""

    def test_lipschitz_ratios(self):
        dynamics = DynamicsFactory()
        base = Control.zeros(dynamics.steps, dynamics.K, dynamics.dt)
        result = solution_map_experiment(dynamics, bump(dynamics.grid), base, (1e-1, 1e-2, 1e-3), seed=5)
        self.assertTrue(result.passed, result.summary)
        self.assertEqual(len(result.rows), 6)
        self.assertEqual({row['slot'] for row in result.rows}, {'initial', 'control'})
