import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import solve_ivp

from drift.spec import DriftSpec
from fwlab.exceptions import BlowUpError, GridMismatchError
from spectral.factories import GridFactory
from spectral.grid import Field
from spectral.norms import inner, l2_norm
from spectral.transforms import semigroup
from .control import Control
from .factories import DynamicsFactory, LinearModeDynamicsFactory
from .solver import integrate_skeleton, solution_map_distance


def bump(grid, amplitude=1.0):
    return Field.from_function(grid, lambda x: amplitude * np.exp(-x ** 2))


def constant_control(dynamics, value):
    return Control(dynamics.dt, np.full((dynamics.steps, dynamics.K), float(value)))


class ControlTest(SimpleTestCase):
    """Test cases for the Control type"""

    def test_energy(self):
        """Test the cached energy is sum dt v^2"""
        control = Control(0.1, np.full((10, 3), 2.0))
        self.assertAlmostEqual(control.energy, 0.1 * 10 * 3 * 4.0)
        self.assertAlmostEqual(control.l2_norm() ** 2, control.energy)
        self.assertAlmostEqual(control.horizon, 1.0)

    def test_arithmetic(self):
        """Test sums and scalar multiples stay on the same time grid"""
        control = Control.from_function(4, 2, 0.25, lambda t: [t, 1.0])
        doubled = 2.0 * control
        self.assertAlmostEqual(doubled.energy, 4.0 * control.energy)
        np.testing.assert_allclose((doubled - control).values, control.values)
        with self.assertRaises(ValueError):
            control + Control.zeros(5, 2, 0.25)

    def test_rejects_bad_input(self):
        """Test shape and dt validation"""
        with self.assertRaises(ValueError):
            Control(0.1, np.zeros(5))
        with self.assertRaises(ValueError):
            Control(0.0, np.zeros((5, 1)))


class IntegrateSkeletonTest(SimpleTestCase):
    """Test cases for the exponential Euler skeleton solver"""

    def test_pure_linear_flow(self):
        """Test v = 0, F = 0, g = 0 reproduces the semigroup at every step"""
        dynamics = DynamicsFactory(drift=DriftSpec.canonical(p=2.0, a=0.0), steps=20)
        u0 = bump(dynamics.grid)
        trajectory = integrate_skeleton(u0, Control.zeros(20, dynamics.K, dynamics.dt), dynamics)
        for m, state in enumerate(trajectory.fields):
            expected = semigroup(u0, dynamics.alpha, m * dynamics.dt)
            np.testing.assert_allclose(state.values, expected.values, atol=1e-12)

    def test_rest_state(self):
        """Test zero data, zero control and F(0) = 0 give the zero trajectory"""
        dynamics = DynamicsFactory()
        trajectory = integrate_skeleton(Field.zeros(dynamics.grid), Control.zeros(50, dynamics.K, dynamics.dt), dynamics)
        np.testing.assert_array_equal(trajectory.states, 0.0)
        self.assertEqual(len(trajectory.fields), 51)
        self.assertAlmostEqual(trajectory.horizon, 0.5)

    def _mode_coefficient(self, dt):
        dynamics = LinearModeDynamicsFactory(dt=dt, steps=round(1.0 / dt))
        mode = Field(dynamics.grid, dynamics.noise.modes[0])
        control = Control.from_function(dynamics.steps, 1, dt, lambda t: np.cos(3.0 * t))
        trajectory = integrate_skeleton(0.3 * mode, control, dynamics)
        return inner(trajectory.terminal, mode)

    def test_scalar_mode_oracle(self):
        """Test the single-mode reduction against an adaptive ODE solve"""
        exact = solve_ivp(
            lambda t, x: -1.5 * x + np.cos(3.0 * t), (0.0, 1.0), [0.3], rtol=1e-11, atol=1e-13,
        ).y[0, -1]
        coarse = abs(self._mode_coefficient(1.0 / 200) - exact)
        fine = abs(self._mode_coefficient(1.0 / 400) - exact)
        self.assertLess(coarse, 3.0 / 200)
        self.assertGreater(coarse / fine, 1.6)
        self.assertLess(coarse / fine, 2.4)

    def test_first_order_convergence(self):
        """Test the Richardson error ratio on a nonlinear multiplicative problem"""
        coarse = DynamicsFactory(dt=0.25 / 32, steps=32, taming=False)
        u0 = bump(coarse.grid)

        def terminal(dynamics):
            return integrate_skeleton(u0, constant_control(dynamics, 0.5), dynamics).terminal

        reference = terminal(coarse.refined(32))
        error = l2_norm(terminal(coarse) - reference)
        error_half = l2_norm(terminal(coarse.refined(2)) - reference)
        self.assertGreater(error / error_half, 1.7)
        self.assertLess(error / error_half, 2.3)

    def test_taming_vanishes_at_fine_dt(self):
        """Test tamed and untamed runs agree as dt shrinks"""
        untamed = DynamicsFactory(dt=1.0 / 512, steps=128, taming=False)
        tamed = DynamicsFactory(dt=1.0 / 512, steps=128, taming=True)
        self.assertTrue(DynamicsFactory().tamed)
        u0 = bump(untamed.grid, 1.5)
        difference = l2_norm(
            integrate_skeleton(u0, constant_control(tamed, 0.5), tamed).terminal
            - integrate_skeleton(u0, constant_control(untamed, 0.5), untamed).terminal
        )
        self.assertLess(difference, 1e-2)

    def test_discrete_dissipativity(self):
        """Test ||u^{m+1}|| <= ||u^m|| + dt^2 with the canonical drift and no forcing"""
        dynamics = DynamicsFactory(steps=100)
        trajectory = integrate_skeleton(bump(dynamics.grid, 2.0), Control.zeros(100, dynamics.K, dynamics.dt), dynamics)
        self.assertTrue(np.all(np.diff(trajectory.l2_norms()) <= dynamics.dt ** 2))

    def test_blow_up_reports_step(self):
        """Test an anti-dissipative drift aborts with the step index"""
        drift = DriftSpec(p=2.0, a=0.0, function=lambda t, u: -u ** 3, derivative=lambda t, u: -3.0 * u ** 2)
        dynamics = DynamicsFactory(drift=drift, dt=0.1, steps=50)
        with self.assertRaises(BlowUpError) as caught:
            integrate_skeleton(Field.constant(dynamics.grid, 10.0), Control.zeros(50, dynamics.K, 0.1), dynamics)
        self.assertGreaterEqual(caught.exception.step, 1)
        self.assertLessEqual(caught.exception.step, 50)

    def test_mismatched_inputs(self):
        """Test controls and initial data must fit the solver grid"""
        dynamics = DynamicsFactory()
        with self.assertRaises(ValueError):
            integrate_skeleton(Field.zeros(dynamics.grid), Control.zeros(10, dynamics.K, dynamics.dt), dynamics)
        with self.assertRaises(GridMismatchError):
            integrate_skeleton(Field.zeros(dynamics.grid), Control.zeros(50, 1, dynamics.dt), dynamics)
        with self.assertRaises(GridMismatchError):
            integrate_skeleton(Field.zeros(GridFactory(points=32)), Control.zeros(50, dynamics.K, dynamics.dt), dynamics)

    def test_norm_records(self):
        """Test per-step norm records have one entry per state"""
        dynamics = DynamicsFactory(steps=10)
        trajectory = integrate_skeleton(bump(dynamics.grid), constant_control(dynamics, 0.2), dynamics)
        records = trajectory.norm_records()
        for values in records.values():
            self.assertEqual(values.shape, (11,))
        self.assertTrue(np.all(records['h_alpha'] >= records['l2']))


class SolutionMapTest(SimpleTestCase):
    """Test cases for the solution map distances"""

    def setUp(self):
        self.dynamics = DynamicsFactory(steps=40)
        self.u0 = bump(self.dynamics.grid)
        self.control = constant_control(self.dynamics, 0.3)

    def test_identical_inputs(self):
        """Test identical runs are at distance zero"""
        distance = solution_map_distance(self.u0, self.u0, self.control, self.control, self.dynamics)
        self.assertEqual(distance, {'sup_l2_sq': 0.0, 'v_integral': 0.0})

    def test_initial_data_ratio_is_bounded(self):
        """Test the distance over delta^2 stays bounded for a delta sweep in u0"""
        direction = bump(self.dynamics.grid)
        direction = direction * (1.0 / l2_norm(direction))
        ratios = []
        for delta in (1e-1, 1e-2, 1e-3):
            distance = solution_map_distance(
                self.u0, self.u0 + delta * direction, self.control, self.control, self.dynamics,
            )
            ratios.append(distance['sup_l2_sq'] / delta ** 2)
        self.assertLess(max(ratios) / min(ratios), 2.0)
        self.assertGreaterEqual(min(ratios), 1.0 - 1e-9)

    def test_control_ratio_is_bounded(self):
        """Test the distance over delta^2 ||w||^2 stays bounded for a delta sweep in v"""
        w = Control.from_function(40, self.dynamics.K, self.dynamics.dt, lambda t: np.sin(2 * np.pi * t) * np.ones(4))
        ratios = []
        for delta in (1e-1, 1e-2, 1e-3):
            distance = solution_map_distance(self.u0, self.u0, self.control, self.control + delta * w, self.dynamics)
            ratios.append(distance['v_integral'] / (delta ** 2 * w.energy))
        self.assertLess(max(ratios) / min(ratios), 2.0)
