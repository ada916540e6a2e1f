import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate, special

from fwlab.exceptions import GridMismatchError, NonFiniteError
from .factories import GridFactory
from .grid import Field, Grid
from .norms import (
    h_alpha_norm, h_alpha_seminorm, inner, l2_norm, lp_norm, smooth_cutoff,
    tail_mass, weighted_tail_mass,
)
from .transforms import (
    forward, frac_laplacian, inverse, parseval_factor, semigroup, spectral_energy,
)


def singular_integral_seminorm_sq(alpha, cut=10.0):
    """
    (1/2) C(1, alpha) times the double integral of |u(x)-u(y)|^2/|x-y|^{1+2 alpha}
    for u = exp(-x^2), by quadrature in x and adaptive quadrature in the offset
    """
    c = alpha * 4 ** alpha * special.gamma((1 + 2 * alpha) / 2) / (math.sqrt(math.pi) * special.gamma(1 - alpha))
    x = np.linspace(-14.0, 14.0, 8001)
    dx = x[1] - x[0]
    u = np.exp(-x ** 2)
    norm_sq = dx * np.sum(u ** 2)

    def shift_energy(y):
        return dx * np.sum((np.exp(-(x + y) ** 2) - u) ** 2)

    near, _ = integrate.quad(lambda y: shift_energy(y) / y ** (1 + 2 * alpha), 0.0, cut, limit=200)
    # beyond the cut the bumps no longer overlap
    far = 2.0 * norm_sq * cut ** (-2 * alpha) / (2 * alpha)
    return 0.5 * c * 2.0 * (near + far)


class FieldTest(SimpleTestCase):
    """Test cases for grids and fields"""

    def test_grid_rejects_bad_sizes(self):
        """Test grid validation of point count and dimension"""
        with self.assertRaises(ValueError):
            Grid(dim=1, half_width=1.0, points=48)
        with self.assertRaises(ValueError):
            Grid(dim=1, half_width=1.0, points=2)
        with self.assertRaises(ValueError):
            Grid(dim=4, half_width=1.0, points=8)

    def test_wavenumbers(self):
        """Test wavenumbers are pi j / L"""
        grid = GridFactory(half_width=2.0, points=8)
        expected = np.pi * np.array([0, 1, 2, 3, -4, -3, -2, -1]) / 2.0
        np.testing.assert_allclose(grid.wavenumbers, expected)

    def test_non_finite_values_rejected(self):
        """Test a field refuses nan entries"""
        grid = GridFactory()
        values = np.zeros(grid.shape)
        values[3] = np.nan
        with self.assertRaises(NonFiniteError):
            Field(grid, values)

    def test_grid_mismatch(self):
        """Test inner product of fields on different grids"""
        f = Field.constant(GridFactory(points=32), 1.0)
        g = Field.constant(GridFactory(points=64), 1.0)
        with self.assertRaises(GridMismatchError):
            inner(f, g)


class FourierTest(SimpleTestCase):
    """Test cases for the unitary Fourier pair"""

    def setUp(self):
        self.grid = GridFactory()
        self.rng = np.random.default_rng(7)

    def test_constant_has_only_zero_mode(self):
        """Test a constant field puts all spectral mass at xi = 0"""
        spectrum = forward(Field.constant(self.grid, 1.0))
        self.assertGreater(abs(spectrum.coeffs[0]), 1.0)
        self.assertLess(np.abs(spectrum.coeffs[1:]).max(), 1e-12)

    def test_single_cosine_mode(self):
        """Test cos(pi x / L) has two conjugate coefficients"""
        L = self.grid.half_width
        spectrum = forward(Field.from_function(self.grid, lambda x: np.cos(np.pi * x / L)))
        nonzero = np.flatnonzero(np.abs(spectrum.coeffs) > 1e-10)
        self.assertEqual(list(nonzero), [1, self.grid.points - 1])
        self.assertAlmostEqual(spectrum.coeffs[1], np.conj(spectrum.coeffs[-1]), places=12)
        self.assertTrue(spectrum.is_hermitian())

    def test_round_trip(self):
        """Test inverse(forward(f)) reproduces f"""
        f = Field(self.grid, self.rng.standard_normal(self.grid.shape))
        back = inverse(forward(f))
        self.assertLess(l2_norm(back - f) / l2_norm(f), 1e-12)

    def test_round_trip_three_dimensions(self):
        """Test the pair on a 3D grid"""
        grid = Grid(dim=3, half_width=1.0, points=8)
        f = Field(grid, self.rng.standard_normal(grid.shape))
        np.testing.assert_allclose(inverse(forward(f)).values, f.values, atol=1e-12)

    def test_parseval(self):
        """Test Parseval for 1000 random fields"""
        grid = GridFactory(points=32)
        for _ in range(1000):
            f = Field(grid, self.rng.standard_normal(grid.shape))
            energy = l2_norm(f) ** 2
            self.assertLess(abs(energy - spectral_energy(forward(f))) / energy, 1e-10)
        self.assertEqual(parseval_factor(grid), grid.spacing)


class NormTest(SimpleTestCase):
    """Test cases for norms and inner products"""

    def test_constant_field_l2(self):
        """Test ||c|| = |c| (2L)^{n/2}"""
        grid = Grid(dim=2, half_width=1.5, points=16)
        f = Field.constant(grid, -2.0)
        self.assertAlmostEqual(l2_norm(f), 2.0 * 3.0, places=12)

    def test_lp_consistency(self):
        """Test lp_norm with p = 2 equals l2_norm"""
        grid = GridFactory()
        f = Field(grid, np.random.default_rng(1).standard_normal(grid.shape))
        self.assertAlmostEqual(lp_norm(f, 2), l2_norm(f), places=12)
        self.assertAlmostEqual(lp_norm(f, np.inf), np.abs(f.values).max())
        with self.assertRaises(ValueError):
            lp_norm(f, 0.5)

    def test_sine_l2_norm(self):
        """Test ||sin x|| = sqrt(pi) on [-pi, pi)"""
        grid = GridFactory()
        f = Field.from_function(grid, np.sin)
        self.assertAlmostEqual(l2_norm(f), math.sqrt(math.pi), places=12)

    def test_inner_product(self):
        """Test orthogonality of sine and cosine"""
        grid = GridFactory()
        self.assertAlmostEqual(inner(Field.from_function(grid, np.sin), Field.from_function(grid, np.cos)), 0.0)

    def test_h_alpha_constant(self):
        """Test the seminorm of a constant vanishes"""
        f = Field.constant(GridFactory(), 3.0)
        self.assertAlmostEqual(h_alpha_norm(f, 0.5), l2_norm(f), places=12)

    def test_h_alpha_single_mode(self):
        """Test alpha = 1 on a mode: seminorm^2 = |xi|^2 ||f||^2"""
        grid = GridFactory()
        f = Field.from_function(grid, lambda x: np.cos(3 * x))
        self.assertAlmostEqual(h_alpha_seminorm(f, 1.0) ** 2, 9.0 * l2_norm(f) ** 2, places=10)

    def test_h_alpha_rejects_alpha(self):
        """Test alpha outside (0, 1]"""
        f = Field.constant(GridFactory(), 1.0)
        with self.assertRaises(ValueError):
            h_alpha_norm(f, 1.5)
        with self.assertRaises(ValueError):
            h_alpha_norm(f, 0.0)

    def test_h_alpha_monotone_in_alpha(self):
        """Test monotonicity for spectral mass at |xi| >= 1"""
        grid = GridFactory()
        f = Field.from_function(grid, lambda x: np.sin(x) + 0.5 * np.cos(4 * x))
        values = [h_alpha_norm(f, alpha) for alpha in (0.1, 0.3, 0.5, 0.8, 1.0)]
        self.assertEqual(values, sorted(values))

    def test_seminorm_matches_singular_integral(self):
        """Test spectral seminorm against quadrature of the double integral"""
        grid = Grid(dim=1, half_width=16.0, points=256)
        f = Field.from_function(grid, lambda x: np.exp(-x ** 2))
        for alpha in (0.25, 0.5, 0.75):
            spectral = h_alpha_seminorm(f, alpha) ** 2
            quadrature = singular_integral_seminorm_sq(alpha)
            self.assertLess(abs(spectral - quadrature) / quadrature, 0.02, msg=f"alpha={alpha}")


class OperatorTest(SimpleTestCase):
    """Test cases for the fractional Laplacian and its semigroup"""

    def setUp(self):
        self.grid = GridFactory()
        rng = np.random.default_rng(3)
        self.f = Field(self.grid, rng.standard_normal(self.grid.shape))
        self.g = Field(self.grid, rng.standard_normal(self.grid.shape))

    def test_eigenfunction(self):
        """Test a Fourier mode is an eigenfunction with eigenvalue |xi|^{2 alpha}"""
        f = Field.from_function(self.grid, lambda x: np.cos(2 * x))
        result = frac_laplacian(f, 0.3)
        np.testing.assert_allclose(result.values, 2 ** 0.6 * f.values, atol=1e-12)

    def test_zero_mode(self):
        """Test constants are annihilated and left fixed by the semigroup"""
        f = Field.constant(self.grid, 2.0)
        np.testing.assert_allclose(frac_laplacian(f, 0.5).values, 0.0, atol=1e-12)
        np.testing.assert_allclose(semigroup(f, 0.5, 3.0).values, 2.0, atol=1e-12)

    def test_semigroup_law(self):
        """Test S(0) = I and S(t) S(s) = S(t + s)"""
        np.testing.assert_allclose(semigroup(self.f, 0.7, 0.0).values, self.f.values, atol=1e-12)
        twice = semigroup(semigroup(self.f, 0.7, 0.2), 0.7, 0.3)
        once = semigroup(self.f, 0.7, 0.5)
        self.assertLess(l2_norm(twice - once), 1e-10)
        with self.assertRaises(ValueError):
            semigroup(self.f, 0.7, -1.0)

    def test_self_adjoint(self):
        """Test (A f, g) = (f, A g)"""
        left = inner(frac_laplacian(self.f, 0.4), self.g)
        right = inner(self.f, frac_laplacian(self.g, 0.4))
        self.assertLess(abs(left - right), 1e-10 * max(1.0, abs(left)))

    def test_semigroup_contraction(self):
        """Test ||S(t) f|| <= ||f||"""
        for t in (0.0, 0.01, 0.5, 10.0):
            self.assertLessEqual(l2_norm(semigroup(self.f, 0.5, t)), l2_norm(self.f) + 1e-12)

    def test_alpha_one_matches_finite_differences(self):
        """Test second-order convergence of -u'' differences to the alpha = 1 operator"""
        errors = []
        for points in (32, 64, 128):
            grid = GridFactory(points=points)
            f = Field.from_function(grid, lambda x: np.exp(np.sin(x)))
            h = grid.spacing
            fd = -(np.roll(f.values, -1) - 2 * f.values + np.roll(f.values, 1)) / h ** 2
            errors.append(np.abs(frac_laplacian(f, 1.0).values - fd).max())
        for coarse, fine in zip(errors, errors[1:]):
            self.assertTrue(3.5 < coarse / fine < 4.5, msg=f"ratio {coarse / fine}")


class TailTest(SimpleTestCase):
    """Test cases for tail mass and the smooth cutoff"""

    def test_disjoint_support(self):
        """Test a field supported inside |x| < m has no tail"""
        grid = Grid(dim=1, half_width=8.0, points=64)
        f = Field.from_function(grid, lambda x: np.where(np.abs(x) < 2.0, 1.0, 0.0))
        self.assertEqual(tail_mass(f, 3.0), 0.0)
        self.assertEqual(weighted_tail_mass(f, 6.0), 0.0)

    def test_constant_geometry(self):
        """Test tail mass of 1 is 2 (L - m) up to one cell"""
        grid = Grid(dim=1, half_width=8.0, points=64)
        f = Field.constant(grid, 1.0)
        self.assertAlmostEqual(tail_mass(f, 4.1), 2 * (8.0 - 4.1), delta=grid.spacing)

    def test_gaussian_tail(self):
        """Test the tail of exp(-x^2) against the erfc closed form"""
        grid = Grid(dim=1, half_width=10.0, points=1024)
        f = Field.from_function(grid, lambda x: np.exp(-x ** 2))
        m = 3.0
        exact = math.sqrt(math.pi / 2) * special.erfc(math.sqrt(2) * m)
        self.assertLess(abs(tail_mass(f, m) - exact), 2 * grid.spacing * math.exp(-2 * m ** 2))

    def test_radius_outside_box(self):
        """Test m >= L is rejected"""
        grid = Grid(dim=1, half_width=8.0, points=64)
        with self.assertRaises(ValueError):
            tail_mass(Field.constant(grid, 1.0), 8.0)
        with self.assertRaises(ValueError):
            smooth_cutoff(grid, 9.0)

    def test_smooth_cutoff_shape(self):
        """Test theta_m is 0 inside m/2, 1 outside m and monotone in between"""
        grid = Grid(dim=1, half_width=8.0, points=256)
        theta = smooth_cutoff(grid, 4.0).values
        r = grid.radius
        self.assertTrue(np.all(theta[r <= 2.0] == 0.0))
        self.assertTrue(np.all(theta[r >= 4.0] == 1.0))
        right = theta[grid.points // 2:]
        self.assertTrue(np.all(np.diff(right) >= 0.0))

    def test_weighted_below_indicator_at_half_radius(self):
        """Test the smooth tail is bracketed by the indicator tails at m and m/2"""
        grid = Grid(dim=2, half_width=6.0, points=64)
        f = Field.from_function(grid, lambda x, y: np.exp(-(x ** 2 + y ** 2) / 4))
        weighted = weighted_tail_mass(f, 4.0)
        self.assertLessEqual(tail_mass(f, 4.0), weighted)
        self.assertLessEqual(weighted, tail_mass(f, 2.0))
