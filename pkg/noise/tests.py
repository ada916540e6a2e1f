import math

import numpy as np
from django.test import SimpleTestCase

from drift.conditions import SampleSpec
from fwlab.exceptions import GridMismatchError
from spectral.factories import GridFactory
from spectral.grid import Field
from spectral.norms import inner, l2_norm
from .conditions import check_noise_conditions, random_states
from .factories import AdditiveNoiseFactory, NoiseSpecFactory
from .operators import (
    adjoint_sigma, apply_sigma, hs_norm_sq, lipschitz_check, mode_truncation_increments,
)
from .spec import SineEnvelope, Sigma2Family, build_noise


class NoiseSpecTest(SimpleTestCase):
    """Test cases for NoiseSpec construction"""

    def test_family_constants(self):
        """Test alpha, beta, gamma of the built-in families"""
        linear = Sigma2Family('linear', [2.0, -1.0])
        bounded = Sigma2Family('bounded', [2.0, -1.0])
        np.testing.assert_array_equal(linear.lipschitz, [2.0, 1.0])
        np.testing.assert_array_equal(linear.offset, [0.0, 0.0])
        np.testing.assert_array_equal(linear.growth, [2.0, 1.0])
        np.testing.assert_array_equal(bounded.offset, [2.0, 1.0])
        np.testing.assert_array_equal(bounded.growth, [0.0, 0.0])
        with self.assertRaises(ValueError):
            Sigma2Family('cubic', [1.0])

    def test_summability(self):
        """Test the summability constant under k^{-1} decay"""
        spec = NoiseSpecFactory(K=3, coupling=1.0, decay=1.0)
        expected = 2 * (1 + 1 / 4 + 1 / 9)
        self.assertAlmostEqual(spec.summability(), expected)

    def test_fourier_modes_are_unit_norm(self):
        """Test the default Fourier profiles have norm a_k"""
        spec = build_noise(GridFactory(), 4, profile='fourier', amplitude=2.0, decay=1.0, kappa_shape='zero')
        norms = np.sqrt(spec.additive_norms_sq())
        np.testing.assert_allclose(norms, [2.0, 1.0, 2.0 / 3.0, 0.5])

    def test_grid_mismatch(self):
        """Test modes must fit the grid"""
        spec = NoiseSpecFactory()
        with self.assertRaises(GridMismatchError):
            apply_sigma(spec, 0.0, Field.zeros(GridFactory(points=32)), np.zeros(spec.K))
        with self.assertRaises(GridMismatchError):
            apply_sigma(spec, 0.0, Field.zeros(spec.grid), np.zeros(spec.K + 1))


class SigmaOperatorTest(SimpleTestCase):
    """Test cases for the action, adjoint and norms of sigma"""

    def setUp(self):
        self.spec = NoiseSpecFactory()
        self.grid = self.spec.grid
        self.rng = np.random.default_rng(11)
        self.u = Field(self.grid, self.rng.standard_normal(self.grid.shape))

    def test_additive_part_only(self):
        """Test kappa = 0 and v = e_k returns sigma_{1,k}"""
        spec = NoiseSpecFactory(kappa_shape='zero')
        v = np.zeros(spec.K)
        v[2] = 1.0
        np.testing.assert_array_equal(apply_sigma(spec, 0.0, self.u, v).values, spec.modes[2])

    def test_zero_control(self):
        """Test v = 0 gives the zero field"""
        result = apply_sigma(self.spec, 0.0, self.u, np.zeros(self.spec.K))
        np.testing.assert_array_equal(result.values, 0.0)

    def test_zero_state_linear_family(self):
        """Test sigma_2(0) = 0 leaves only the additive part"""
        v = self.rng.standard_normal(self.spec.K)
        result = apply_sigma(self.spec, 0.0, Field.zeros(self.grid), v)
        np.testing.assert_allclose(result.values, np.tensordot(v, self.spec.modes, axes=1), atol=1e-14)

    def test_linearity(self):
        """Test sigma(u)(a v + b w) = a sigma(u) v + b sigma(u) w"""
        v, w = self.rng.standard_normal((2, self.spec.K))
        left = apply_sigma(self.spec, 0.0, self.u, 2.0 * v - 3.0 * w)
        right = 2.0 * apply_sigma(self.spec, 0.0, self.u, v) - 3.0 * apply_sigma(self.spec, 0.0, self.u, w)
        self.assertLess(l2_norm(left - right), 1e-12 * max(1.0, l2_norm(left)))

    def test_duality(self):
        """Test (sigma(u) v, q) = v . sigma(u)^* q"""
        for _ in range(5):
            v = self.rng.standard_normal(self.spec.K)
            q = Field(self.grid, self.rng.standard_normal(self.grid.shape))
            left = inner(apply_sigma(self.spec, 0.3, self.u, v), q)
            right = float(np.dot(v, adjoint_sigma(self.spec, 0.3, self.u, q)))
            self.assertLess(abs(left - right), 1e-10 * max(1.0, abs(left)))

    def test_adjoint_of_zero(self):
        """Test the adjoint of q = 0"""
        np.testing.assert_array_equal(adjoint_sigma(self.spec, 0.0, self.u, Field.zeros(self.grid)), 0.0)

    def test_rank_one_projection(self):
        """Test K = 1, unit mode, kappa = 0 gives the projection coefficient"""
        spec = AdditiveNoiseFactory(grid=GridFactory(), amplitude=1.0)
        q = Field.from_function(spec.grid, lambda x: 3.0 * np.cos(x) + np.sin(2 * x))
        coefficient = adjoint_sigma(spec, 0.0, self.u, q)
        self.assertAlmostEqual(coefficient[0], 3.0 * math.sqrt(math.pi), places=10)

    def test_hs_norm_additive(self):
        """Test the HS norm is independent of u for additive noise"""
        spec = NoiseSpecFactory(kappa_shape='zero')
        expected = float(np.sum(spec.additive_norms_sq()))
        self.assertAlmostEqual(hs_norm_sq(spec, 0.0, self.u), expected)
        self.assertAlmostEqual(hs_norm_sq(spec, 0.0, 5.0 * self.u), expected)
        zero_family = NoiseSpecFactory(sigma2='zero')
        self.assertAlmostEqual(hs_norm_sq(zero_family, 0.0, self.u), float(np.sum(zero_family.additive_norms_sq())))

    def test_hs_growth_bound(self):
        """Test ||sigma(u)||_HS^2 <= L1 (1 + ||u||^2) + 2 sum ||sigma_1k||^2 on random u"""
        additive = 2.0 * float(np.sum(self.spec.additive_norms_sq()))
        for u in random_states(self.spec, 20, 3.0, seed=5):
            bound = self.spec.growth_constant() * (1.0 + l2_norm(u) ** 2) + additive
            self.assertLessEqual(hs_norm_sq(self.spec, 0.0, u), bound)

    def test_lipschitz(self):
        """Test the HS Lipschitz bound on equal and random pairs"""
        self.assertLessEqual(lipschitz_check(self.spec, 0.0, self.u, self.u), 0.0)
        for u1, u2 in zip(random_states(self.spec, 10, 2.0, 1), random_states(self.spec, 10, 2.0, 2)):
            self.assertLessEqual(lipschitz_check(self.spec, 0.0, u1, u2), 1e-12)
        additive = NoiseSpecFactory(kappa_shape='zero')
        self.assertEqual(lipschitz_check(additive, 0.0, self.u, 2.0 * self.u), 0.0)

    def test_truncation_increments(self):
        """Test partial HS sums are nondecreasing and end at the full norm"""
        spec = NoiseSpecFactory(K=8)
        sums = mode_truncation_increments(spec, 0.0, self.u)
        self.assertTrue(np.all(np.diff(sums) >= 0.0))
        self.assertAlmostEqual(sums[-1], hs_norm_sq(spec, 0.0, self.u))
        self.assertAlmostEqual(sums[3], hs_norm_sq(spec.truncated(4), 0.0, self.u))

    def test_envelope_scales_additive_part(self):
        """Test the time envelope multiplies sigma_1"""
        spec = build_noise(GridFactory(), 2, kappa_shape='zero', envelope=SineEnvelope(0.5, 1.0))
        v = np.ones(2)
        at_quarter = apply_sigma(spec, 0.25, self.u, v)
        np.testing.assert_allclose(at_quarter.values, 1.5 * spec.modes.sum(axis=0))


class NoiseConditionTest(SimpleTestCase):
    """Test cases for the noise condition checker"""

    def test_linear_family_passes(self):
        """Test every noise condition holds for the linear family"""
        report = check_noise_conditions(NoiseSpecFactory(), SampleSpec(u_samples=201, pairs=500))
        self.assertTrue(report.all_hold, msg=report.violations)
        self.assertGreater(report['sig3'].empirical['sum_alpha_beta_gamma_sq'], 0.0)

    def test_bounded_family_passes(self):
        """Test every noise condition holds for the bounded family"""
        report = check_noise_conditions(NoiseSpecFactory(sigma2='bounded'), SampleSpec(u_samples=201, pairs=500))
        self.assertTrue(report.all_hold, msg=report.violations)
