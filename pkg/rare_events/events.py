from dataclasses import dataclass
from typing import Optional

import numpy as np

from fwlab.exceptions import GridMismatchError
from skeleton.trajectory import Trajectory
from spectral.grid import Field
from spectral.norms import inner_values, l2_norm_sq_values

EVENT_KINDS = ('terminal_threshold', 'tube_exit', 'terminal_ball', 'always', 'never')


@dataclass(frozen=True, eq=False)
class EventSpec:
    """
    Borel set of trajectories with a pure, vectorized indicator.

    terminal_threshold: (u(T), e) >= threshold
    tube_exit:          max_m ||u^m - phi^m|| >= radius
    terminal_ball:      ||u(T) - phi(T)|| <= radius
    """
    kind: str
    threshold: Optional[float] = None
    radius: Optional[float] = None
    observable: Optional[Field] = None
    reference: Optional[Trajectory] = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}, expected one of {EVENT_KINDS}")
        if self.kind == 'terminal_threshold' and (self.threshold is None or self.observable is None):
            raise ValueError("a terminal threshold event needs a threshold and an observable")
        if self.kind in ('tube_exit', 'terminal_ball'):
            if self.reference is None or self.radius is None or not self.radius > 0:
                raise ValueError(f"a {self.kind} event needs a reference path and a positive radius")

    @property
    def grid(self):
        if self.observable is not None:
            return self.observable.grid
        if self.reference is not None:
            return self.reference.grid
        return None

    def check_states(self, states):
        grid = self.grid
        if grid is not None and states.shape[2:] != grid.shape:
            raise GridMismatchError("trajectories and event live on different grids")
        if self.kind == 'tube_exit' and states.shape[1] != self.reference.states.shape[0]:
            raise GridMismatchError("tube reference has a different number of steps")

    def evaluate_states(self, states):
        """Indicator for a batch of trajectories of shape (B, M+1, *grid)"""
        self.check_states(states)
        batch = states.shape[0]
        if self.kind == 'always':
            return np.ones(batch, dtype=bool)
        if self.kind == 'never':
            return np.zeros(batch, dtype=bool)
        if self.kind == 'terminal_threshold':
            grid = self.observable.grid
            return inner_values(states[:, -1], self.observable.values, grid) >= self.threshold
        grid = self.reference.grid
        if self.kind == 'terminal_ball':
            distance_sq = l2_norm_sq_values(states[:, -1] - self.reference.states[-1], grid)
            return distance_sq <= self.radius ** 2
        distance_sq = l2_norm_sq_values(states - self.reference.states, grid)
        return np.max(distance_sq, axis=1) >= self.radius ** 2

    def __call__(self, trajectory):
        return bool(self.evaluate_states(trajectory.states[np.newaxis])[0])

    def as_dict(self):
        return {'kind': self.kind, 'threshold': self.threshold, 'radius': self.radius}
