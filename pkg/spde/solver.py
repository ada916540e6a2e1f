"""
Stochastic exponential Euler for the SPDE and its Girsanov-shifted
variant, plus the discrete energy-identity residual.
"""
import logging

import numpy as np

from fwlab.exceptions import BlowUpError, GridMismatchError
from noise.operators import apply_sigma_values, hs_norm_sq_values
from skeleton.solver import check_control, check_initial
from skeleton.trajectory import Trajectory
from spectral.norms import inner_values, l2_norm_sq_values, seminorm_sq_values

logger = logging.getLogger(__name__)


def check_epsilon(epsilon):
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")


def log_likelihood_ratio(epsilon, control, increments):
    """
    log dP~/dP = -eps^{-1/2} sum v.dW - (2 eps)^{-1} sum dt |v|^2 along the
    realized increments; increments may carry a leading batch axis.
    """
    values = control.values
    cross = np.sum(values * increments, axis=(-2, -1))
    return -cross / np.sqrt(epsilon) - control.energy / (2.0 * epsilon)


def _run(u0, dynamics, kicks):
    states = np.empty((dynamics.steps + 1,) + dynamics.grid.shape)
    states[0] = u0.values
    for m in range(dynamics.steps):
        states[m + 1] = dynamics.advance(m, states[m], kicks[m])
        if not np.isfinite(states[m + 1]).all():
            logger.warning("stochastic run blew up at step %d of %d", m + 1, dynamics.steps)
            raise BlowUpError(m + 1)
    return states


def simulate_spde(u0, epsilon, dynamics, stream):
    check_epsilon(epsilon)
    check_initial(u0, dynamics)
    increments = stream.increments(dynamics.steps, dynamics.K, dynamics.dt)
    states = _run(u0, dynamics, np.sqrt(epsilon) * increments)
    return Trajectory(dynamics.grid, dynamics.dt, states, dynamics.alpha, dynamics.drift.p)


def simulate_shifted(u0, epsilon, control, dynamics, stream):
    """SPDE with the extra drift sigma(u) v, carrying the Girsanov log-weight"""
    if epsilon <= 0:
        raise ValueError(f"the shifted equation needs epsilon > 0, got {epsilon}")
    check_initial(u0, dynamics)
    check_control(control, dynamics)
    increments = stream.increments(dynamics.steps, dynamics.K, dynamics.dt)
    kicks = np.sqrt(epsilon) * increments + dynamics.dt * control.values
    states = _run(u0, dynamics, kicks)
    log_weight = float(log_likelihood_ratio(epsilon, control, increments))
    return Trajectory(dynamics.grid, dynamics.dt, states, dynamics.alpha, dynamics.drift.p, log_weight)


def simulate_batch(u0, epsilon, dynamics, increments, control=None):
    """
    Integrate a batch of trajectories at once.

    ``increments`` has shape (B, M, K). Rows that leave the finite range are
    zeroed from then on and reported by their first non-finite step
    (-1 when the row stayed finite). Returns states (B, M+1, *grid),
    log-weights (B,) or None, and blow-up steps (B,).
    """
    batch = increments.shape[0]
    kicks = np.sqrt(epsilon) * increments
    if control is not None:
        kicks = kicks + dynamics.dt * control.values
    states = np.empty((batch, dynamics.steps + 1) + dynamics.grid.shape)
    states[:, 0] = u0.values
    blow_up = np.full(batch, -1)
    spatial = tuple(range(1, dynamics.grid.dim + 1))
    for m in range(dynamics.steps):
        nxt = dynamics.advance(m, states[:, m], kicks[:, m])
        bad = ~np.isfinite(nxt).all(axis=spatial)
        if bad.any():
            blow_up[bad & (blow_up < 0)] = m + 1
            nxt[bad] = 0.0
        states[:, m + 1] = nxt
    log_weights = None
    if control is not None:
        log_weights = log_likelihood_ratio(epsilon, control, increments)
    return states, log_weights, blow_up


def energy_residual(trajectory, epsilon, dynamics, stream, control=None):
    """
    max over m of |LHS - RHS| in the discrete energy identity

        ||u^m||^2 + 2 sum dt ||(-Delta)^{alpha/2} u||^2 + 2 sum dt (F(u), u)
          = ||u^0||^2 + 2 sum dt (u, g) + 2 sqrt(eps) sum (u, sigma(u) dW)
            + eps sum dt ||sigma(u)||_HS^2

    with left-point sums over j < m; a shifted run adds 2 sum dt (u, sigma(u) v).
    """
    check_epsilon(epsilon)
    if trajectory.grid != dynamics.grid or trajectory.steps != dynamics.steps:
        raise GridMismatchError("trajectory does not match the dynamics")
    grid = dynamics.grid
    dt = dynamics.dt
    states = trajectory.states
    left = states[:-1]
    increments = stream.increments(dynamics.steps, dynamics.K, dt)
    times = dynamics.times[:-1]

    dissipation = 2.0 * dt * seminorm_sq_values(left, grid, dynamics.alpha)
    with np.errstate(all='ignore'):
        drift = np.stack([dynamics.drift.evaluate(t, u) for t, u in zip(times, left)])
    reaction = 2.0 * dt * inner_values(drift, left, grid)
    forcing = 2.0 * dt * inner_values(left, dynamics.forcing_values, grid)

    stochastic = np.zeros(dynamics.steps)
    correction = np.zeros(dynamics.steps)
    if epsilon > 0:
        kicked = np.stack([
            apply_sigma_values(dynamics.noise, t, u, dw) for t, u, dw in zip(times, left, increments)
        ])
        stochastic = 2.0 * np.sqrt(epsilon) * inner_values(left, kicked, grid)
        correction = epsilon * dt * np.array([hs_norm_sq_values(dynamics.noise, t, u) for t, u in zip(times, left)])
    shift = np.zeros(dynamics.steps)
    if control is not None:
        pushed = np.stack([
            apply_sigma_values(dynamics.noise, t, u, v) for t, u, v in zip(times, left, control.values)
        ])
        shift = 2.0 * dt * inner_values(left, pushed, grid)

    lhs = l2_norm_sq_values(states[1:], grid) + np.cumsum(dissipation + reaction)
    rhs = l2_norm_sq_values(states[0], grid) + np.cumsum(forcing + stochastic + correction + shift)
    return float(np.max(np.abs(lhs - rhs)))
