from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from fwlab.exceptions import GridMismatchError, NonFiniteError
from spectral.grid import Field, Grid
from spectral.norms import (
    h_alpha_norm_sq_values, l2_norm_sq_values, lp_norm_values, tail_mass_values,
)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    States u^0 .. u^M of one integration, stacked on the leading axis.

    ``log_weight`` carries the Girsanov log-likelihood ratio of a shifted
    stochastic run and is None otherwise.
    """
    grid: Grid
    dt: float
    states: np.ndarray = field(repr=False)
    alpha: float
    p: float = 2.0
    log_weight: Optional[float] = None

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != self.grid.dim + 1 or states.shape[1:] != self.grid.shape:
            raise GridMismatchError(f"states of shape {states.shape} do not fit grid {self.grid.shape}")
        if not np.isfinite(states).all():
            raise NonFiniteError("trajectory contains non-finite states")
        object.__setattr__(self, 'states', states)

    @property
    def steps(self):
        return self.states.shape[0] - 1

    @property
    def horizon(self):
        return self.dt * self.steps

    @property
    def times(self):
        return self.dt * np.arange(self.steps + 1)

    @property
    def fields(self):
        return [Field(self.grid, state) for state in self.states]

    @property
    def initial(self):
        return Field(self.grid, self.states[0])

    @property
    def terminal(self):
        return Field(self.grid, self.states[-1])

    def l2_norms(self):
        return np.sqrt(l2_norm_sq_values(self.states, self.grid))

    def h_alpha_norms(self):
        return np.sqrt(h_alpha_norm_sq_values(self.states, self.grid, self.alpha))

    def lp_norms(self, p=None):
        return lp_norm_values(self.states, self.grid, p or self.p)

    def norm_records(self):
        return {
            'l2': self.l2_norms(),
            'h_alpha': self.h_alpha_norms(),
            'lp': self.lp_norms(),
        }

    def sup_l2_sq(self):
        return float(np.max(l2_norm_sq_values(self.states, self.grid)))

    def v_integral(self):
        """Left-point sum of dt ||u^m||_V^2 over m < M"""
        return float(self.dt * np.sum(h_alpha_norm_sq_values(self.states[:-1], self.grid, self.alpha)))

    def lp_integral(self, p=None):
        p = p or self.p
        return float(self.dt * np.sum(lp_norm_values(self.states[:-1], self.grid, p) ** p))

    def sup_tail_mass(self, m):
        return float(np.max(tail_mass_values(self.states, self.grid, m)))

    def distance(self, other, p=None):
        """
        Discrete C([0,T],H), L^2(0,T;V) and L^p(0,T;L^p) distances to
        another trajectory on the same grid and time steps.
        """
        if other.grid != self.grid or other.states.shape != self.states.shape:
            raise GridMismatchError("trajectories live on different grids or time steps")
        difference = Trajectory(self.grid, self.dt, self.states - other.states, self.alpha, self.p)
        p = p or self.p
        return {
            'sup_l2': float(np.sqrt(difference.sup_l2_sq())),
            'v_integral': difference.v_integral(),
            'lp': difference.lp_integral(p) ** (1.0 / p),
        }
