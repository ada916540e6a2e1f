import numpy as np
from django.test import SimpleTestCase, override_settings

from drift.factories import LinearDriftFactory
from drift.spec import DriftSpec
from noise.factories import AdditiveNoiseFactory
from property_lab.oracles import discrete_ou_variance
from skeleton.control import Control
from skeleton.factories import DynamicsFactory
from skeleton.solver import integrate_skeleton
from spectral.factories import GridFactory
from spectral.grid import Field
from spectral.norms import inner_values
from .ensemble import chunk_ranges, iter_ensemble
from .factories import NoiseStreamFactory
from .solver import energy_residual, simulate_shifted, simulate_spde
from .stream import NoiseStream


def bump(grid, amplitude=1.0):
    return Field.from_function(grid, lambda x: amplitude * np.exp(-x ** 2))


def ou_dynamics(drift=None, amplitude=0.8, dt=0.02, steps=50):
    """F = 0 (or the given drift), kappa = 0, one noise mode cos(x)/sqrt(pi)"""
    grid = GridFactory()
    return DynamicsFactory(
        grid=grid,
        drift=drift or DriftSpec.canonical(p=2.0, a=0.0),
        noise=AdditiveNoiseFactory(grid=grid, amplitude=amplitude),
        dt=dt,
        steps=steps,
    )


def terminal_coefficients(chunks, mode, grid):
    return np.concatenate([inner_values(chunk.states[:, -1], mode, grid) for chunk in chunks])


class NoiseStreamTest(SimpleTestCase):
    """Test cases for counter-based noise streams"""

    def test_same_key_is_bit_identical(self):
        """Test a stream replays exactly"""
        first = NoiseStream(5, 3).increments(40, 4, 0.01)
        second = NoiseStream(5, 3).increments(40, 4, 0.01)
        np.testing.assert_array_equal(first, second)

    def test_fixed_counter_position(self):
        """Test the draw for (step, mode) does not depend on the horizon"""
        long = NoiseStream(5, 3).increments(100, 2, 0.01)
        short = NoiseStream(5, 3).increments(50, 2, 0.01)
        np.testing.assert_array_equal(long[:50], short)

    def test_distinct_indices_are_uncorrelated(self):
        """Test the cross-correlation of two trajectory streams"""
        samples = 10000
        first, second = (stream.increments(samples, 1, 1.0).ravel() for stream in NoiseStreamFactory.build_batch(2))
        self.assertLess(abs(np.corrcoef(first, second)[0, 1]), 3.0 / np.sqrt(samples))

    def test_increment_variance(self):
        """Test increments have variance dt"""
        increments = NoiseStream(1).increments(20000, 1, 0.04)
        self.assertAlmostEqual(float(np.var(increments)), 0.04, delta=0.04 * 0.05)

    def test_negative_seed(self):
        """Test seeds must be nonnegative"""
        with self.assertRaises(ValueError):
            NoiseStream(-1)


class SimulateSpdeTest(SimpleTestCase):
    """Test cases for the stochastic exponential Euler solver"""

    def setUp(self):
        self.dynamics = DynamicsFactory()
        self.u0 = bump(self.dynamics.grid)
        self.stream = NoiseStream(11, 0)

    def test_noise_off_is_skeleton(self):
        """Test epsilon = 0 reproduces the uncontrolled skeleton"""
        noisy = simulate_spde(self.u0, 0.0, self.dynamics, self.stream)
        skeleton = integrate_skeleton(self.u0, Control.zeros(50, self.dynamics.K, self.dynamics.dt), self.dynamics)
        np.testing.assert_array_equal(noisy.states, skeleton.states)

    def test_determinism(self):
        """Test two runs on the same stream are bit-identical"""
        first = simulate_spde(self.u0, 0.1, self.dynamics, self.stream)
        second = simulate_spde(self.u0, 0.1, self.dynamics, NoiseStream(11, 0))
        np.testing.assert_array_equal(first.states, second.states)
        other = simulate_spde(self.u0, 0.1, self.dynamics, NoiseStream(11, 1))
        self.assertFalse(np.array_equal(first.states, other.states))

    def test_negative_epsilon(self):
        """Test epsilon must be nonnegative"""
        with self.assertRaises(ValueError):
            simulate_spde(self.u0, -0.1, self.dynamics, self.stream)

    def test_ou_variance(self):
        """Test the terminal mode coefficient variance against the discrete recursion"""
        dynamics = ou_dynamics()
        mode = dynamics.noise.modes[0] / 0.8
        chunks = iter_ensemble(Field.zeros(dynamics.grid), 0.1, dynamics, seed=7, count=10000, chunk_size=500)
        coefficients = terminal_coefficients(chunks, mode, dynamics.grid)
        expected = discrete_ou_variance(0.1, 0.8, 1.0, 0.0, dynamics.dt, dynamics.steps)
        self.assertLess(abs(float(np.mean(coefficients ** 2)) / expected - 1.0), 0.05)

    def test_linear_in_sqrt_epsilon(self):
        """Test u^eps - u^0 scales exactly with sqrt(eps) for additive noise and linear drift"""
        dynamics = ou_dynamics(drift=LinearDriftFactory())
        u0 = bump(dynamics.grid)
        base = simulate_spde(u0, 0.0, dynamics, self.stream).states
        scaled = [
            (simulate_spde(u0, epsilon, dynamics, self.stream).states - base) / np.sqrt(epsilon)
            for epsilon in (0.01, 0.09)
        ]
        np.testing.assert_allclose(scaled[0], scaled[1], rtol=1e-8, atol=1e-10)


class SimulateShiftedTest(SimpleTestCase):
    """Test cases for the Girsanov-shifted solver"""

    def setUp(self):
        self.dynamics = DynamicsFactory()
        self.u0 = bump(self.dynamics.grid)
        self.control = Control(self.dynamics.dt, np.full((50, self.dynamics.K), 0.3))

    def test_zero_shift(self):
        """Test v = 0 gives the plain run and a zero log-weight"""
        zero = Control.zeros(50, self.dynamics.K, self.dynamics.dt)
        shifted = simulate_shifted(self.u0, 0.1, zero, self.dynamics, NoiseStream(3))
        plain = simulate_spde(self.u0, 0.1, self.dynamics, NoiseStream(3))
        np.testing.assert_array_equal(shifted.states, plain.states)
        self.assertEqual(shifted.log_weight, 0.0)
        self.assertIsNone(plain.log_weight)

    def test_zero_epsilon_forbidden(self):
        """Test the weight is undefined at epsilon = 0"""
        with self.assertRaises(ValueError):
            simulate_shifted(self.u0, 0.0, self.control, self.dynamics, NoiseStream(3))

    def test_likelihood_ratio_has_unit_mean(self):
        """Test E[exp(logRN)] = 1 over 10^4 shifted samples"""
        dynamics = ou_dynamics()
        control = Control(dynamics.dt, np.full((dynamics.steps, 1), 0.5))
        chunks = iter_ensemble(Field.zeros(dynamics.grid), 0.25, dynamics, seed=3, count=10000, control=control)
        weights = np.exp(np.concatenate([chunk.log_weights for chunk in chunks]))
        self.assertGreater(weights.mean(), 0.95)
        self.assertLess(weights.mean(), 1.05)

    def test_deterministic_limit(self):
        """Test the shifted run approaches the controlled skeleton as epsilon -> 0"""
        skeleton = integrate_skeleton(self.u0, self.control, self.dynamics)
        distances = [
            simulate_shifted(self.u0, epsilon, self.control, self.dynamics, NoiseStream(9)).distance(skeleton)['sup_l2']
            for epsilon in (1e-2, 1e-3, 1e-4)
        ]
        self.assertTrue(all(later < earlier for earlier, later in zip(distances, distances[1:])))


class EnsembleTest(SimpleTestCase):
    """Test cases for chunked ensembles"""

    def setUp(self):
        self.dynamics = DynamicsFactory(steps=20)
        self.u0 = bump(self.dynamics.grid)

    def test_chunk_ranges(self):
        """Test chunks tile the index range in order"""
        ranges = chunk_ranges(10, 4)
        self.assertEqual([list(r) for r in ranges], [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9]])

    def test_rows_match_single_runs(self):
        """Test row i of the ensemble is the run on stream (seed, i)"""
        chunks = list(iter_ensemble(self.u0, 0.1, self.dynamics, seed=4, count=6, chunk_size=4))
        self.assertEqual([chunk.start for chunk in chunks], [0, 4])
        single = simulate_spde(self.u0, 0.1, self.dynamics, NoiseStream(4, 5))
        np.testing.assert_allclose(chunks[1].states[1], single.states, rtol=1e-12, atol=1e-14)

    @override_settings(FWLAB_CHUNK_SIZE=8)
    def test_thread_count_does_not_change_results(self):
        """Test ensembles are bit-identical on one and four threads"""
        one = [chunk.states for chunk in iter_ensemble(self.u0, 0.1, self.dynamics, 4, 40, threads=1)]
        four = [chunk.states for chunk in iter_ensemble(self.u0, 0.1, self.dynamics, 4, 40, threads=4)]
        np.testing.assert_array_equal(np.concatenate(one), np.concatenate(four))

    def test_blow_ups_are_reported(self):
        """Test non-finite rows are flagged with their step"""
        drift = DriftSpec(p=2.0, a=0.0, function=lambda t, u: -u ** 3, derivative=lambda t, u: -3.0 * u ** 2)
        dynamics = DynamicsFactory(drift=drift, dt=0.1, steps=30)
        chunks = list(iter_ensemble(Field.constant(dynamics.grid, 10.0), 0.01, dynamics, 1, 5))
        self.assertFalse(chunks[0].finite.any())
        self.assertTrue(np.all(chunks[0].blow_up >= 1))
        self.assertTrue(np.isfinite(chunks[0].states).all())


class EnergyResidualTest(SimpleTestCase):
    """Test cases for the discrete energy identity"""

    def test_zero_data(self):
        """Test zero data and no forcing give a zero residual"""
        dynamics = DynamicsFactory()
        stream = NoiseStream(2)
        trajectory = simulate_spde(Field.zeros(dynamics.grid), 0.0, dynamics, stream)
        self.assertEqual(energy_residual(trajectory, 0.0, dynamics, stream), 0.0)

    def test_deterministic_residual_halves(self):
        """Test the residual of the linear flow halves with dt"""
        residuals = []
        for dt, steps in ((1.0 / 200, 100), (1.0 / 400, 200)):
            dynamics = DynamicsFactory(drift=DriftSpec.canonical(p=2.0, a=0.0), dt=dt, steps=steps)
            stream = NoiseStream(2)
            trajectory = simulate_spde(bump(dynamics.grid), 0.0, dynamics, stream)
            residuals.append(energy_residual(trajectory, 0.0, dynamics, stream))
        self.assertGreater(residuals[0] / residuals[1], 1.4)
        self.assertLess(residuals[0] / residuals[1], 2.6)

    def test_stochastic_residual_decreases(self):
        """Test the mean residual of nonlinear noisy runs drops under refinement"""
        means = []
        for dt, steps in ((1.0 / 64, 16), (1.0 / 256, 64)):
            dynamics = DynamicsFactory(dt=dt, steps=steps)
            residuals = []
            for index in range(8):
                stream = NoiseStream(6, index)
                trajectory = simulate_spde(bump(dynamics.grid), 0.1, dynamics, stream)
                residuals.append(energy_residual(trajectory, 0.1, dynamics, stream))
            means.append(np.mean(residuals))
        self.assertLess(means[1], means[0])
