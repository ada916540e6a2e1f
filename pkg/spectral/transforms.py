"""
Fourier pair, fractional Laplacian and its semigroup on the periodic box.

The fractional Laplacian is the Fourier multiplier |xi|^{2 alpha}; the
semigroup it generates is the multiplier exp(-t |xi|^{2 alpha}).
"""
import numpy as np

from .grid import Field, SpectralField


def check_alpha(alpha):
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")


def forward(f):
    """Unitary DFT of a field"""
    return SpectralField(f.grid, np.fft.fftn(f.values, norm='ortho'))


def inverse(spectrum):
    """Inverse unitary DFT; the real part is returned"""
    values = np.fft.ifftn(spectrum.coeffs, norm='ortho')
    return Field(spectrum.grid, values.real)


def fractional_symbol(grid, alpha):
    """|xi|^{2 alpha} on the half-spectrum layout"""
    return grid.real_wavenumber_norm ** (2.0 * alpha)


def semigroup_symbol(grid, alpha, t):
    return np.exp(-t * fractional_symbol(grid, alpha))


def apply_multiplier(values, grid, symbol):
    """
    Apply a real even Fourier multiplier to a real array whose trailing
    axes are the grid; leading axes are treated as a batch.
    """
    axes = grid.axes
    spectrum = np.fft.rfftn(values, axes=axes)
    return np.fft.irfftn(spectrum * symbol, s=grid.shape, axes=axes)


def frac_laplacian(f, alpha):
    check_alpha(alpha)
    return Field(f.grid, apply_multiplier(f.values, f.grid, fractional_symbol(f.grid, alpha)))


def fractional_power(f, alpha):
    """(-Delta)^{alpha/2} f"""
    check_alpha(alpha)
    return Field(f.grid, apply_multiplier(f.values, f.grid, fractional_symbol(f.grid, alpha / 2.0)))


def semigroup(f, alpha, t):
    check_alpha(alpha)
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    return Field(f.grid, apply_multiplier(f.values, f.grid, semigroup_symbol(f.grid, alpha, t)))


def parseval_factor(grid):
    """Factor turning sum |coeffs|^2 into the squared L2 norm"""
    return grid.cell_volume


def spectral_energy(spectrum):
    return parseval_factor(spectrum.grid) * float(np.sum(np.abs(spectrum.coeffs) ** 2))
