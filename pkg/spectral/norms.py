"""
Norms and functionals of fields by rectangle-rule quadrature.

Array helpers (suffix ``_values``) reduce over the trailing grid axes and
keep any leading batch axes; the Field functions are thin wrappers.
"""
import numpy as np

from .grid import Field, check_same_grid
from .transforms import apply_multiplier, check_alpha, fractional_symbol


def l2_norm_sq_values(values, grid):
    return grid.cell_volume * np.sum(values ** 2, axis=grid.axes)


def inner_values(a, b, grid):
    return grid.cell_volume * np.sum(a * b, axis=grid.axes)


def lp_norm_values(values, grid, p):
    if p == np.inf:
        return np.max(np.abs(values), axis=grid.axes)
    return (grid.cell_volume * np.sum(np.abs(values) ** p, axis=grid.axes)) ** (1.0 / p)


def seminorm_sq_values(values, grid, alpha):
    """||(-Delta)^{alpha/2} u||^2, computed through the half spectrum"""
    check_alpha(alpha)
    half = fractional_symbol(grid, alpha / 2.0)
    return l2_norm_sq_values(apply_multiplier(values, grid, half), grid)


def h_alpha_norm_sq_values(values, grid, alpha):
    return l2_norm_sq_values(values, grid) + seminorm_sq_values(values, grid, alpha)


def l2_norm(f):
    return float(np.sqrt(l2_norm_sq_values(f.values, f.grid)))


def lp_norm(f, p):
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(lp_norm_values(f.values, f.grid, p))


def inner(f, g):
    grid = check_same_grid(f, g)
    return float(inner_values(f.values, g.values, grid))


def h_alpha_seminorm(f, alpha):
    return float(np.sqrt(seminorm_sq_values(f.values, f.grid, alpha)))


def h_alpha_norm(f, alpha):
    """sqrt(||u||^2 + ||(-Delta)^{alpha/2} u||^2)"""
    return float(np.sqrt(h_alpha_norm_sq_values(f.values, f.grid, alpha)))


def check_tail_radius(grid, m):
    if not 0.0 < m < grid.half_width:
        raise ValueError(f"tail radius must lie in (0, L={grid.half_width}), got {m}")


def tail_indicator(grid, m):
    check_tail_radius(grid, m)
    return grid.radius >= m


def tail_mass_values(values, grid, m):
    return grid.cell_volume * np.sum(np.where(tail_indicator(grid, m), values ** 2, 0.0), axis=grid.axes)


def tail_mass(f, m):
    """Integral of |f|^2 over |x| >= m"""
    return float(tail_mass_values(f.values, f.grid, m))


def cutoff_profile(r):
    """0 on [0, 1/2], 1 on [1, inf), C^2 polynomial bridge in between"""
    s = np.clip(2.0 * np.asarray(r, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - (1.0 - s) ** 3 * (1.0 + 3.0 * s + 6.0 * s ** 2)


def smooth_cutoff(grid, m):
    check_tail_radius(grid, m)
    return Field(grid, cutoff_profile(grid.radius / m))


def weighted_tail_mass(f, m):
    """Integral of theta_m |f|^2, the smooth form of the tail mass"""
    theta = smooth_cutoff(f.grid, m)
    return float(f.grid.cell_volume * np.sum(theta.values * f.values ** 2))
