import numpy as np
from django.test import SimpleTestCase

from property_lab.oracles import discrete_gramian, gramian, minimal_action, optimal_control
from skeleton.control import Control
from skeleton.factories import DynamicsFactory, LinearModeDynamicsFactory
from skeleton.solver import integrate_skeleton
from spectral.grid import Field
from .adjoint import action, evaluate, gradient_check, objective_and_gradient
from .factories import RateProblemFactory, unit_mode
from .optimizer import linear_mode_warm_start, minimize
from .problem import OptimizerSettings, RateProblem

# x^2 / (2 W(1)) for c = 1, a = 3/2, x = 1
LQ_ACTION = 1.578594


def bump(grid, amplitude=1.0):
    return Field.from_function(grid, lambda x: amplitude * np.exp(-x ** 2))


def random_control(dynamics, scale=0.5, seed=1):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return Control(dynamics.dt, scale * rng.standard_normal((dynamics.steps, dynamics.K)))


class ActionTest(SimpleTestCase):
    """Test cases for the action functional"""

    def test_zero_control(self):
        """Test the action of v = 0"""
        self.assertEqual(action(Control.zeros(10, 3, 0.1)), 0.0)

    def test_constant_single_mode(self):
        """Test v_k = c on [0, T] gives c^2 T / 2"""
        values = np.zeros((50, 3))
        values[:, 1] = 2.0
        self.assertAlmostEqual(action(Control(0.02, values)), 0.5 * 4.0 * 1.0)

    def test_quadratic_homogeneity(self):
        """Test action(lambda v) = lambda^2 action(v)"""
        control = random_control(DynamicsFactory(steps=20))
        self.assertAlmostEqual(action(3.0 * control), 9.0 * action(control))


class AdjointGradientTest(SimpleTestCase):
    """Test cases for the discrete adjoint gradient"""

    def test_linear_finite_differences(self):
        """Test the gradient of the linear problem against central differences"""
        problem = RateProblemFactory(dynamics=LinearModeDynamicsFactory(dt=1.0 / 40, steps=40), x=0.7)
        self.assertLess(gradient_check(problem, random_control(problem.dynamics)), 1e-5)

    def test_nonlinear_multiplicative_finite_differences(self):
        """Test the gradient for p = 4 with multiplicative noise"""
        dynamics = DynamicsFactory(steps=30)
        problem = RateProblem(dynamics, bump(dynamics.grid), 'endpoint', bump(dynamics.grid, 0.5), 10.0)
        self.assertLess(gradient_check(problem, random_control(dynamics)), 1e-5)

    def test_untamed_finite_differences(self):
        """Test the gradient with taming switched off"""
        dynamics = DynamicsFactory(steps=30, taming=False)
        problem = RateProblem(dynamics, bump(dynamics.grid), 'endpoint', bump(dynamics.grid, 0.5), 10.0)
        self.assertLess(gradient_check(problem, random_control(dynamics, seed=2)), 1e-5)

    def test_path_mode_finite_differences(self):
        """Test the gradient of the path misfit"""
        dynamics = DynamicsFactory(steps=30)
        target = integrate_skeleton(bump(dynamics.grid), random_control(dynamics, seed=5), dynamics)
        problem = RateProblem(dynamics, bump(dynamics.grid), 'path', target, 10.0)
        self.assertLess(gradient_check(problem, random_control(dynamics)), 1e-5)

    def test_observable_mode_finite_differences(self):
        """Test the gradient of the observable misfit"""
        dynamics = DynamicsFactory(steps=30)
        problem = RateProblem(
            dynamics, bump(dynamics.grid), 'observable', 0.8, 10.0, observable=unit_mode(dynamics),
        )
        self.assertLess(gradient_check(problem, random_control(dynamics)), 1e-5)

    def test_zero_penalty(self):
        """Test beta = 0 leaves the pure action gradient dt v"""
        dynamics = DynamicsFactory(steps=30)
        control = random_control(dynamics)
        problem = RateProblem(dynamics, bump(dynamics.grid), 'endpoint', bump(dynamics.grid, 0.5), 0.0)
        value, gradient = objective_and_gradient(problem, control)
        np.testing.assert_array_equal(gradient.values, dynamics.dt * control.values)
        self.assertAlmostEqual(value, action(control))

    def test_rejects_bad_problems(self):
        """Test mode and penalty validation"""
        dynamics = DynamicsFactory(steps=5)
        with self.assertRaises(ValueError):
            RateProblem(dynamics, bump(dynamics.grid), 'sideways', bump(dynamics.grid), 1.0)
        with self.assertRaises(ValueError):
            RateProblem(dynamics, bump(dynamics.grid), 'endpoint', bump(dynamics.grid), -1.0)
        with self.assertRaises(ValueError):
            RateProblem(dynamics, bump(dynamics.grid), 'observable', 1.0, 1.0)


class MinimizeTest(SimpleTestCase):
    """Test cases for the minimum-action optimizer"""

    def test_linear_quadratic_action(self):
        """Test the minimal action against the controllability Gramian"""
        self.assertAlmostEqual(minimal_action(1.0, gramian(1.0, 1.5, 1.0)), LQ_ACTION, places=5)
        result = minimize(RateProblemFactory())
        self.assertTrue(result.converged, msg=result.message)
        self.assertLess(abs(result.action / LQ_ACTION - 1.0), 0.02)
        self.assertLess(result.gradient_norm, 1e-6)
        self.assertLess(result.residual, 1e-2)
        self.assertEqual(result.beta, 2000.0)

    def test_linear_quadratic_control_shape(self):
        """Test v* matches c exp(-a (T - t)) x / W pointwise"""
        problem = RateProblemFactory()
        result = minimize(problem)
        times = problem.dynamics.times[:-1]
        expected = optimal_control(times, 1.0, 1.5, 1.0, 1.0)
        np.testing.assert_allclose(result.control.values[:, 0], expected, rtol=0.05)

    def test_target_scaling(self):
        """Test scaling the target by lambda scales the action by lambda^2"""
        dynamics = LinearModeDynamicsFactory(dt=1.0 / 100, steps=100)
        single = minimize(RateProblemFactory(dynamics=dynamics, x=1.0))
        double = minimize(RateProblemFactory(dynamics=dynamics, x=2.0))
        self.assertAlmostEqual(double.action / single.action, 4.0, delta=4e-3)

    def test_uncontrolled_endpoint(self):
        """Test the endpoint of the v = 0 run costs nothing"""
        dynamics = DynamicsFactory(steps=20)
        u0 = bump(dynamics.grid)
        target = integrate_skeleton(u0, Control.zeros(20, dynamics.K, dynamics.dt), dynamics).terminal
        result = minimize(RateProblem(dynamics, u0, 'endpoint', target, 10.0))
        self.assertTrue(result.converged)
        self.assertEqual(result.action, 0.0)
        self.assertLess(result.residual, 1e-12)

    def test_monotone_descent(self):
        """Test J never increases across accepted iterations"""
        dynamics = LinearModeDynamicsFactory(dt=1.0 / 40, steps=40)
        for method in ('armijo', 'lbfgs'):
            settings = OptimizerSettings(method=method, max_iterations=60, continuation=(1.0, 10.0))
            result = minimize(RateProblemFactory(dynamics=dynamics, settings=settings))
            for stage in result.history:
                self.assertTrue(all(b <= a + 1e-12 for a, b in zip(stage, stage[1:])), msg=method)

    def test_refinement_invariance(self):
        """Test halving dt changes the converged action by less than 2%"""
        coarse = minimize(RateProblemFactory(dynamics=LinearModeDynamicsFactory(dt=1.0 / 200, steps=200)))
        fine = minimize(RateProblemFactory())
        self.assertLess(abs(coarse.action / fine.action - 1.0), 0.02)

    def test_unreachable_target_is_flagged(self):
        """Test a target outside the reachable mode is reported as non-converged"""
        dynamics = LinearModeDynamicsFactory(dt=1.0 / 50, steps=50)
        problem = RateProblem(dynamics, Field.zeros(dynamics.grid), 'endpoint', bump(dynamics.grid), 20.0)
        result = minimize(problem)
        self.assertFalse(result.converged)
        self.assertGreater(result.residual, 0.5)

    def test_observable_matches_endpoint(self):
        """Test the half-space boundary problem has the same action as the endpoint one"""
        dynamics = LinearModeDynamicsFactory(dt=1.0 / 100, steps=100)
        endpoint = minimize(RateProblemFactory(dynamics=dynamics))
        observable = minimize(RateProblem(
            dynamics, Field.zeros(dynamics.grid), 'observable', 1.0, 20.0, observable=unit_mode(dynamics),
        ))
        self.assertAlmostEqual(observable.action / endpoint.action, 1.0, delta=1e-3)

    def test_multistart(self):
        """Test seeded multistart returns a converged best start"""
        dynamics = LinearModeDynamicsFactory(dt=1.0 / 100, steps=100)
        single = minimize(RateProblemFactory(dynamics=dynamics))
        settings = OptimizerSettings(multistart=3, perturbation=0.5, seed=4)
        best = minimize(RateProblemFactory(dynamics=dynamics, settings=settings))
        self.assertTrue(best.converged)
        self.assertAlmostEqual(best.action / single.action, 1.0, delta=1e-4)

    def test_warm_start_is_minimal_energy(self):
        """Test the analytic warm start has the discrete minimal action"""
        dynamics = LinearModeDynamicsFactory(dt=1.0 / 100, steps=100)
        warm = linear_mode_warm_start(dynamics, 1.0, 1.0, 0.5)
        expected = minimal_action(1.0, discrete_gramian(1.0, 1.0, 0.5, dynamics.dt, dynamics.steps))
        self.assertAlmostEqual(action(warm), expected, places=10)
        terminal = integrate_skeleton(Field.zeros(dynamics.grid), warm, dynamics).terminal
        reached = float(np.sum(terminal.values * unit_mode(dynamics).values) * dynamics.grid.cell_volume)
        self.assertAlmostEqual(reached, 1.0, places=8)

    def test_positive_penalty_required(self):
        """Test minimize refuses beta = 0"""
        with self.assertRaises(ValueError):
            minimize(RateProblemFactory(beta=0.0))

    def test_evaluation_gradient_norm(self):
        """Test the reported gradient norm is the L^2(0,T;l^2) norm"""
        problem = RateProblemFactory(dynamics=LinearModeDynamicsFactory(dt=1.0 / 40, steps=40))
        result = evaluate(problem, random_control(problem.dynamics))
        expected = np.sqrt(np.sum(problem.dynamics.dt * (result.gradient.values / problem.dynamics.dt) ** 2))
        self.assertAlmostEqual(result.gradient_norm, expected)
