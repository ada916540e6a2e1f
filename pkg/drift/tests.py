import numpy as np
from django.test import SimpleTestCase

from fwlab.exceptions import ConditionSampleError, NonFiniteError
from spectral.factories import GridFactory
from spectral.grid import Field
from .conditions import SampleSpec, check_conditions
from .factories import DriftSpecFactory, LinearDriftFactory
from .spec import DriftSpec, eval_dF, eval_F


class DriftEvaluationTest(SimpleTestCase):
    """Test cases for drift evaluation"""

    def setUp(self):
        self.grid = GridFactory(points=16)

    def test_canonical_arithmetic(self):
        """Test F(2) = 8 - 2 for p = 4, a = 1, b = 1"""
        drift = DriftSpecFactory(b=1.0)
        result = eval_F(drift, 0.0, Field.constant(self.grid, 2.0))
        np.testing.assert_allclose(result.values, 6.0)

    def test_zero_field(self):
        """Test F(0) = 0"""
        drift = DriftSpecFactory(b=1.0)
        result = eval_F(drift, 0.0, Field.zeros(self.grid))
        np.testing.assert_array_equal(result.values, 0.0)

    def test_derivative_at_origin(self):
        """Test dF/du(0) = -b"""
        drift = DriftSpecFactory(b=1.0)
        result = eval_dF(drift, 0.0, Field.zeros(self.grid))
        np.testing.assert_allclose(result.values, -1.0)
        self.assertEqual(drift.psi3_bound, 1.0)

    def test_linear_family(self):
        """Test p = 2 gives a linear drift with constant slope"""
        drift = LinearDriftFactory()
        f = Field.from_function(self.grid, np.sin)
        np.testing.assert_allclose(eval_F(drift, 0.0, f).values, 0.5 * f.values)
        np.testing.assert_allclose(eval_dF(drift, 0.0, f).values, 0.5)

    def test_derivative_matches_finite_differences(self):
        """Test eval_dF against centered differences of eval_F"""
        drift = DriftSpecFactory(p=5.0, a=0.7, b=0.3)
        u = np.linspace(-3.0, 3.0, 101)
        h = 1e-5
        fd = (drift.evaluate(0.0, u + h) - drift.evaluate(0.0, u - h)) / (2 * h)
        np.testing.assert_allclose(drift.slope(0.0, u), fd, rtol=1e-6, atol=1e-6)

    def test_overflow_reported(self):
        """Test extreme values surface as a non-finite error"""
        drift = DriftSpecFactory(p=6.0)
        with self.assertRaises(NonFiniteError):
            eval_F(drift, 0.0, Field.constant(self.grid, 1e80))

    def test_custom_evaluators(self):
        """Test a drift given by a pair of evaluators"""
        drift = DriftSpec(p=3.0, a=1.0, function=lambda t, u: u * np.abs(u), derivative=lambda t, u: 2 * np.abs(u))
        self.assertFalse(drift.is_canonical)
        np.testing.assert_allclose(eval_F(drift, 0.0, Field.constant(self.grid, -2.0)).values, -4.0)
        with self.assertRaises(ValueError):
            DriftSpec(p=3.0, a=1.0, function=lambda t, u: u)

    def test_monotone_without_softening(self):
        """Test (F(u1) - F(u2))(u1 - u2) >= 0 when b = 0"""
        drift = DriftSpecFactory()
        u1, u2 = SampleSpec(seed=4).state_pairs()
        product = (drift.evaluate(0.0, u1) - drift.evaluate(0.0, u2)) * (u1 - u2)
        self.assertGreaterEqual(product.min(), 0.0)


class DriftConditionTest(SimpleTestCase):
    """Test cases for the structure-condition verifier"""

    def setUp(self):
        self.samples = SampleSpec(u_samples=801, pairs=4000, seed=1)

    def test_coercivity_without_softening(self):
        """Test F2 holds with lambda1 = 1 and psi1 = 0 for u^4"""
        drift = DriftSpecFactory()
        report = check_conditions(drift, self.samples)
        self.assertEqual(report['F2'].declared, {'lambda1': 1.0, 'psi1': 0.0})
        self.assertGreaterEqual(report['F2'].margin, 0.0)
        self.assertTrue(report.all_hold, msg=report.violations)

    def test_canonical_with_softening(self):
        """Test every condition holds for p = 4, a = 1, b = 1 and lambda4 is reported"""
        report = check_conditions(DriftSpecFactory(b=1.0), self.samples)
        self.assertTrue(report.all_hold, msg=report.violations)
        empirical = report['Fa'].empirical['lambda4']
        self.assertGreaterEqual(empirical, 0.25 - 1e-9)
        self.assertTrue(report['F4'].holds)
        self.assertAlmostEqual(report['F4'].empirical['psi3'], 1.0)

    def test_sign_flip_breaks_coercivity(self):
        """Test a < 0 is flagged by F2"""
        report = check_conditions(DriftSpecFactory(a=-1.0), self.samples)
        self.assertLess(report['F2'].margin, 0.0)
        self.assertIn('F2', report.violations)
        self.assertFalse(report.all_hold)

    def test_time_samples(self):
        """Test the report is one entry per condition over several times"""
        report = check_conditions(DriftSpecFactory(), SampleSpec(t_samples=3, u_samples=51, pairs=100))
        self.assertEqual(sorted(report.entries), ['F1', 'F2', 'F3', 'F4', 'F5', 'F6', 'Fa'])

    def test_empty_cloud(self):
        """Test an empty sample cloud is rejected"""
        with self.assertRaises(ConditionSampleError):
            check_conditions(DriftSpecFactory(), SampleSpec(u_samples=0))
