import logging

import numpy as np

from fwlab.exceptions import BlowUpError, GridMismatchError
from .trajectory import Trajectory

logger = logging.getLogger(__name__)


def check_control(control, dynamics):
    if control.steps != dynamics.steps or not np.isclose(control.dt, dynamics.dt):
        raise ValueError(
            f"control grid ({control.steps} steps of {control.dt}) does not match "
            f"the solver grid ({dynamics.steps} steps of {dynamics.dt})"
        )
    if control.modes != dynamics.K:
        raise GridMismatchError(f"control has {control.modes} modes, noise has {dynamics.K}")


def check_initial(u0, dynamics):
    if u0.grid != dynamics.grid:
        raise GridMismatchError("initial data lives on a different grid")


def integrate_skeleton(u0, control, dynamics):
    """Solve the controlled equation driven by v with exponential Euler"""
    check_initial(u0, dynamics)
    check_control(control, dynamics)
    states = np.empty((dynamics.steps + 1,) + dynamics.grid.shape)
    states[0] = u0.values
    for m in range(dynamics.steps):
        states[m + 1] = dynamics.advance(m, states[m], dynamics.dt * control.values[m])
        if not np.isfinite(states[m + 1]).all():
            logger.warning("skeleton blew up at step %d of %d", m + 1, dynamics.steps)
            raise BlowUpError(m + 1)
    return Trajectory(dynamics.grid, dynamics.dt, states, dynamics.alpha, dynamics.drift.p)


def solution_map_distance(u0_1, u0_2, v1, v2, dynamics):
    """
    sup_t ||u_{v1} - u_{v2}||^2 and the L^2(0,T;V) distance squared of two
    skeleton runs sharing every other parameter.
    """
    first = integrate_skeleton(u0_1, v1, dynamics)
    second = integrate_skeleton(u0_2, v2, dynamics)
    distance = first.distance(second)
    return {
        'sup_l2_sq': distance['sup_l2'] ** 2,
        'v_integral': distance['v_integral'],
    }
