import math

import numpy as np
from django.test import SimpleTestCase

from fwlab.exceptions import WeightDegeneracyError
from property_lab.oracles import discrete_gramian, gaussian_tail, minimal_action
from rate.optimizer import linear_mode_warm_start
from skeleton.control import Control
from skeleton.solver import integrate_skeleton
from skeleton.trajectory import Trajectory
from spectral.factories import GridFactory
from spectral.grid import Field
from .estimators import estimate_is, estimate_naive
from .events import EventSpec
from .factories import ThresholdEventFactory, benchmark_dynamics
from .sweep import boundary_problem, check_epsilons, dominating_point, ldp_sweep


def benchmark_variance(epsilon, dynamics):
    """eps W_d for c = 1, mu = 1, F = u/2"""
    return epsilon * discrete_gramian(1.0, 1.0, 0.5, dynamics.dt, dynamics.steps)


class EventSpecTest(SimpleTestCase):
    """Test cases for event indicators"""

    def setUp(self):
        self.grid = GridFactory()
        self.reference = Trajectory(self.grid, 0.1, np.zeros((4, 64)), 0.75)

    def test_threshold(self):
        """Test the half-space indicator on hand-built terminal states"""
        event = ThresholdEventFactory()
        e = event.observable.values
        states = np.zeros((3, 5, 64))
        states[0, -1] = 2.0 * e
        states[1, -1] = 1.0 * e
        states[2, -1] = 0.5 * e
        states[2, 2] = 5.0 * e
        np.testing.assert_array_equal(event.evaluate_states(states), [True, True, False])

    def test_tube_exit_and_ball(self):
        """Test the sup-norm tube and the terminal ball"""
        tube = EventSpec('tube_exit', radius=1.0, reference=self.reference)
        ball = EventSpec('terminal_ball', radius=1.0, reference=self.reference)
        inside = Trajectory(self.grid, 0.1, np.full((4, 64), 0.1), 0.75)
        excursion = np.full((4, 64), 0.1)
        excursion[1] = 1.0
        outside = Trajectory(self.grid, 0.1, excursion, 0.75)
        self.assertFalse(tube(inside))
        self.assertTrue(tube(outside))
        self.assertTrue(ball(inside))
        self.assertTrue(ball(outside))

    def test_validation(self):
        """Test events need their parameters"""
        with self.assertRaises(ValueError):
            EventSpec('terminal_threshold', threshold=1.0)
        with self.assertRaises(ValueError):
            EventSpec('tube_exit', radius=0.0, reference=self.reference)
        with self.assertRaises(ValueError):
            EventSpec('everywhere')


class NaiveEstimateTest(SimpleTestCase):
    """Test cases for naive Monte Carlo"""

    def setUp(self):
        self.dynamics = benchmark_dynamics()
        self.u0 = Field.zeros(self.dynamics.grid)

    def test_whole_space(self):
        """Test the always-true event has probability one and no spread"""
        estimate = estimate_naive(EventSpec('always'), 0.5, 200, self.dynamics, self.u0, seed=1)
        self.assertEqual(estimate.p_hat, 1.0)
        self.assertEqual(estimate.std_error, 0.0)
        self.assertEqual(estimate.log_p_hat, 0.0)

    def test_empty_event(self):
        """Test a zero count reports the log(1/N) upper bound"""
        estimate = estimate_naive(EventSpec('never'), 0.5, 200, self.dynamics, self.u0, seed=1)
        self.assertEqual(estimate.hits, 0)
        self.assertTrue(estimate.upper_bound)
        self.assertAlmostEqual(estimate.log_p_hat, math.log(1.0 / 200))
        self.assertTrue(estimate.degenerate)

    def test_needs_samples(self):
        """Test fewer than 100 samples are refused"""
        with self.assertRaises(ValueError):
            estimate_naive(EventSpec('always'), 0.5, 99, self.dynamics, self.u0, seed=1)

    def test_gaussian_tail(self):
        """Test the naive estimate against the exact Gaussian tail"""
        truth = gaussian_tail(1.0, benchmark_variance(1.0, self.dynamics))
        estimate = estimate_naive(ThresholdEventFactory(), 1.0, 10000, self.dynamics, self.u0, seed=5)
        self.assertLess(abs(estimate.p_hat - truth), 3.0 * estimate.std_error)

    def test_reproducible(self):
        """Test the same seed gives the identical estimate"""
        event = ThresholdEventFactory()
        first = estimate_naive(event, 1.0, 500, self.dynamics, self.u0, seed=8)
        second = estimate_naive(event, 1.0, 500, self.dynamics, self.u0, seed=8, chunk_size=256, threads=2)
        self.assertEqual(first, second)


class ImportanceSamplingTest(SimpleTestCase):
    """Test cases for Girsanov importance sampling"""

    def setUp(self):
        self.dynamics = benchmark_dynamics()
        self.u0 = Field.zeros(self.dynamics.grid)
        self.event = ThresholdEventFactory()
        self.tilt = linear_mode_warm_start(self.dynamics, 1.0, 1.0, 0.5)

    def test_zero_shift_is_naive(self):
        """Test v = 0 reproduces the naive estimate"""
        zero = Control.zeros(self.dynamics.steps, 1, self.dynamics.dt)
        naive = estimate_naive(self.event, 1.0, 1000, self.dynamics, self.u0, seed=2)
        shifted = estimate_is(self.event, 1.0, zero, 1000, self.dynamics, self.u0, seed=2)
        self.assertEqual(shifted.p_hat, naive.p_hat)
        self.assertEqual(shifted.log_p_hat, naive.log_p_hat)
        self.assertEqual(shifted.hits, naive.hits)
        self.assertEqual(shifted.ess, naive.ess)
        self.assertAlmostEqual(shifted.std_error, naive.std_error, places=12)

    def test_rare_tail(self):
        """Test IS recovers a ~1e-8 tail where naive sampling sees nothing"""
        truth = gaussian_tail(1.0, benchmark_variance(0.1, self.dynamics))
        estimate = estimate_is(self.event, 0.1, self.tilt, 10000, self.dynamics, self.u0, seed=3)
        naive = estimate_naive(self.event, 0.1, 10000, self.dynamics, self.u0, seed=3)
        self.assertLess(abs(estimate.p_hat - truth), 3.0 * estimate.std_error)
        self.assertGreater(estimate.ess, 100)
        self.assertEqual(naive.hits, 0)
        self.assertTrue(naive.upper_bound)

    def test_agrees_with_naive(self):
        """Test naive and IS agree within joint error bars at moderate probability"""
        naive = estimate_naive(self.event, 1.0, 10000, self.dynamics, self.u0, seed=4)
        tilted = estimate_is(self.event, 1.0, self.tilt, 10000, self.dynamics, self.u0, seed=4)
        joint = math.hypot(naive.std_error, tilted.std_error)
        self.assertLess(abs(naive.p_hat - tilted.p_hat), 3.0 * joint)

    def test_degenerate_weights(self):
        """Test an oversized tilt is flagged"""
        huge = Control(self.dynamics.dt, np.full((self.dynamics.steps, 1), 8.0))
        estimate = estimate_is(self.event, 0.02, huge, 200, self.dynamics, self.u0, seed=4)
        self.assertTrue(estimate.degenerate)
        with self.assertRaises(WeightDegeneracyError):
            estimate.check_weights()


class SweepTest(SimpleTestCase):
    """Test cases for epsilon sweeps"""

    def setUp(self):
        self.dynamics = benchmark_dynamics()
        self.u0 = Field.zeros(self.dynamics.grid)
        self.event = ThresholdEventFactory()

    def test_epsilon_grid_validation(self):
        """Test sweeps need three decreasing positive epsilons"""
        with self.assertRaises(ValueError):
            check_epsilons((0.2, 0.1))
        with self.assertRaises(ValueError):
            check_epsilons((0.1, 0.2, 0.05))
        check_epsilons((0.2, 0.1, 0.05))

    def test_gaussian_closure(self):
        """Test -eps log p at eps = 0.02 is within 10% of the minimal action"""
        rate = dominating_point(self.event, self.dynamics, self.u0, beta=20.0)
        expected = minimal_action(1.0, discrete_gramian(1.0, 1.0, 0.5, self.dynamics.dt, self.dynamics.steps))
        self.assertLess(abs(rate.action / expected - 1.0), 0.02)
        sweep = ldp_sweep(
            self.event, (0.2, 0.1, 0.05, 0.02), self.dynamics, self.u0, 10000, seed=6,
            rate=rate.action, control=rate.control,
        )
        last = sweep.rows[-1]
        self.assertEqual(last.method, 'is')
        self.assertLess(abs(last.neg_eps_log_p / rate.action - 1.0), 0.10)
        self.assertTrue(sweep.monotone)
        self.assertEqual(sweep.excluded, [])
        self.assertLess(sweep.gap, 0.10)

    def test_typical_event_has_zero_rate(self):
        """Test a ball around the noise-free endpoint gives -eps log p -> 0"""
        path = integrate_skeleton(self.u0, Control.zeros(100, 1, self.dynamics.dt), self.dynamics)
        ball = EventSpec('terminal_ball', radius=0.5, reference=path)
        sweep = ldp_sweep(ball, (0.2, 0.1, 0.05), self.dynamics, self.u0, 500, seed=2, rate=0.0)
        self.assertTrue(all(row.neg_eps_log_p < 0.05 for row in sweep.rows))
        self.assertLess(abs(sweep.intercept), 0.05)

    def test_low_count_rows_are_excluded(self):
        """Test rows with ESS < 10 leave the fit and are listed"""
        sweep = ldp_sweep(self.event, (2.0, 1.0, 0.1), self.dynamics, self.u0, 1000, seed=3, rate=1.58)
        self.assertEqual(sweep.excluded, [0.1])
        self.assertTrue(sweep.rows[-1].excluded)
        self.assertTrue(sweep.rows[-1].upper_bound)

    def test_no_usable_rows(self):
        """Test a sweep without two usable rows fails loudly"""
        with self.assertRaises(WeightDegeneracyError):
            ldp_sweep(EventSpec('never'), (0.2, 0.1, 0.05), self.dynamics, self.u0, 100, seed=1, rate=1.0)

    def test_tube_has_no_boundary_problem(self):
        """Test tube events have no boundary parametrization"""
        path = integrate_skeleton(self.u0, Control.zeros(100, 1, self.dynamics.dt), self.dynamics)
        with self.assertRaises(ValueError):
            boundary_problem(EventSpec('tube_exit', radius=1.0, reference=path), self.dynamics, self.u0, 20.0)
