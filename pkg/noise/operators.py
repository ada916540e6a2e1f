"""
Action of sigma(t, u) on controls and noise increments, its adjoint and
Hilbert-Schmidt norms.

The ``*_values`` kernels take raw arrays and accept a leading batch axis
on the state and on the l^2 vector; the solvers call them every step.
"""
import numpy as np

from fwlab.exceptions import GridMismatchError
from spectral.grid import Field, check_same_grid
from spectral.norms import inner_values, l2_norm_sq_values


def _check_modes(spec, v):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != spec.K:
        raise GridMismatchError(f"expected {spec.K} noise modes, got {v.shape[-1]}")
    return v


def _spatial(array, grid):
    """Append singleton spatial axes so a batch scalar broadcasts over the grid"""
    return np.reshape(array, np.shape(array) + (1,) * grid.dim)


def apply_sigma_values(spec, t, u, v):
    """sum_k (m(t) sigma_{1,k} + kappa sigma_{2,k}(u)) v_k for u (..., *grid), v (..., K)"""
    grid = spec.grid
    additive = spec.envelope(t) * np.tensordot(v, spec.modes, axes=([-1], [0]))
    if not spec.multiplicative:
        return additive + np.zeros_like(u)
    weight = v @ spec.sigma2.coefficients
    return additive + spec.kappa * spec.sigma2.profile(u) * _spatial(weight, grid)


def sigma_linearization_values(spec, t, u, v):
    """Pointwise derivative in u of sigma(t, u) v"""
    if not spec.multiplicative:
        return np.zeros_like(u)
    weight = v @ spec.sigma2.coefficients
    return spec.kappa * spec.sigma2.profile_slope(u) * _spatial(weight, spec.grid)


def adjoint_sigma_values(spec, t, u, q):
    """Component k is (sigma_{1,k} m(t) + kappa sigma_{2,k}(u), q)"""
    grid = spec.grid
    axes = tuple(range(1, grid.dim + 1))
    additive = spec.envelope(t) * grid.cell_volume * np.tensordot(spec.modes, q, axes=(axes, tuple(range(grid.dim))))
    if not spec.multiplicative:
        return additive
    coupling = inner_values(spec.kappa * spec.sigma2.profile(u), q, grid)
    return additive + spec.sigma2.coefficients * coupling


def mode_columns(spec, t, u):
    """sigma(t, u) e_k for every k, shape (K, *grid)"""
    columns = spec.envelope(t) * spec.modes
    if spec.multiplicative:
        columns = columns + spec.kappa * spec.sigma2.evaluate(u)
    return columns


def hs_norm_sq_values(spec, t, u):
    return float(np.sum(l2_norm_sq_values(mode_columns(spec, t, u), spec.grid)))


def apply_sigma(spec, t, u, v):
    if u.grid != spec.grid:
        raise GridMismatchError("state and noise live on different grids")
    v = _check_modes(spec, v)
    if v.ndim != 1:
        raise GridMismatchError(f"control vector must be one-dimensional, got shape {v.shape}")
    return Field(spec.grid, apply_sigma_values(spec, t, u.values, v))


def adjoint_sigma(spec, t, u, q):
    check_same_grid(u, q)
    if u.grid != spec.grid:
        raise GridMismatchError("state and noise live on different grids")
    return adjoint_sigma_values(spec, t, u.values, q.values)


def hs_norm_sq(spec, t, u):
    """sum_k ||sigma_{1,k} + kappa sigma_{2,k}(u)||^2"""
    if u.grid != spec.grid:
        raise GridMismatchError("state and noise live on different grids")
    return hs_norm_sq_values(spec, t, u.values)


def lipschitz_check(spec, t, u1, u2):
    """
    ||sigma(t,u1) - sigma(t,u2)||_HS^2 - ||kappa||_inf^2 ||u1-u2||^2 sum alpha_k^2,
    nonpositive when the Lipschitz bound holds
    """
    grid = check_same_grid(u1, u2)
    difference = mode_columns(spec, t, u1.values) - mode_columns(spec, t, u2.values)
    left = float(np.sum(l2_norm_sq_values(difference, grid)))
    bound = spec.kappa_sup ** 2 * float(l2_norm_sq_values(u1.values - u2.values, grid)) \
        * float(np.sum(spec.sigma2.lipschitz ** 2))
    return left - bound


def mode_truncation_increments(spec, t, u):
    """Hilbert-Schmidt norm of the first K' modes for K' = 1..K"""
    norms = l2_norm_sq_values(mode_columns(spec, t, u.values), spec.grid)
    return np.cumsum(norms)
