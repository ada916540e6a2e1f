from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from fwlab.exceptions import GridMismatchError
from skeleton.control import Control
from skeleton.dynamics import Dynamics
from skeleton.trajectory import Trajectory
from spectral.grid import Field

MODES = ('endpoint', 'path', 'observable')
METHODS = ('lbfgs', 'armijo')


@dataclass(frozen=True)
class OptimizerSettings:
    method: str = 'lbfgs'
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    function_tolerance: float = 0.0
    armijo_constant: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 40
    continuation: tuple = (1.0, 10.0, 100.0)
    multistart: int = 1
    perturbation: float = 0.1
    seed: int = 0
    residual_tolerance: float = 1e-2

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown optimizer method {self.method!r}, expected one of {METHODS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError(f"backtrack factor must lie in (0, 1), got {self.backtrack}")
        if not self.continuation or any(factor <= 0 for factor in self.continuation):
            raise ValueError("continuation factors must be positive")
        if self.multistart < 1:
            raise ValueError("multistart needs at least one start")


@dataclass(frozen=True, eq=False)
class RateProblem:
    """
    Penalized minimum-action problem

        J(v) = 1/2 sum dt |v_m|^2 + beta/2 misfit(u_v, target)

    with misfit ||u^M - target||^2 (endpoint), sum_{m>=1} dt w_m
    ||u^m - target^m||^2 (path) or ((u^M, e) - x)^2 (observable).
    """
    dynamics: Dynamics
    u0: Field
    mode: str
    target: Union[Field, Trajectory, float]
    beta: float
    observable: Optional[Field] = None
    path_weights: Optional[np.ndarray] = field(default=None, repr=False)
    settings: OptimizerSettings = OptimizerSettings()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown target mode {self.mode!r}, expected one of {MODES}")
        if self.beta < 0:
            raise ValueError(f"penalty beta must be nonnegative, got {self.beta}")
        grid = self.dynamics.grid
        if self.u0.grid != grid:
            raise GridMismatchError("initial data lives on a different grid")
        if self.mode == 'endpoint' and self.target.grid != grid:
            raise GridMismatchError("target lives on a different grid")
        if self.mode == 'path':
            if self.target.grid != grid or self.target.steps != self.dynamics.steps:
                raise GridMismatchError("target path does not match the solver grid")
            weights = np.ones(self.dynamics.steps + 1) if self.path_weights is None else np.asarray(self.path_weights, dtype=float)
            if weights.shape != (self.dynamics.steps + 1,):
                raise ValueError(f"path weights need {self.dynamics.steps + 1} entries")
            object.__setattr__(self, 'path_weights', weights)
        if self.mode == 'observable':
            if self.observable is None or self.observable.grid != grid:
                raise GridMismatchError("observable mode needs an observable field on the solver grid")
            object.__setattr__(self, 'target', float(self.target))

    def with_beta(self, beta):
        return RateProblem(
            self.dynamics, self.u0, self.mode, self.target, beta,
            self.observable, self.path_weights, self.settings,
        )

    def zero_control(self):
        return Control.zeros(self.dynamics.steps, self.dynamics.K, self.dynamics.dt)


@dataclass(frozen=True, eq=False)
class RateResult:
    control: Control
    action: float
    residual: float
    iterations: int
    converged: bool
    objective: float
    beta: float
    gradient_norm: float
    trajectory: Trajectory = field(repr=False)
    sup_distance: Optional[float] = None
    history: list = field(default_factory=list, repr=False)
    stages: list = field(default_factory=list, repr=False)
    message: str = ''

    def as_dict(self):
        return {
            'action': self.action,
            'residual': self.residual,
            'iterations': self.iterations,
            'converged': self.converged,
            'objective': self.objective,
            'beta': self.beta,
            'gradient_norm': self.gradient_norm,
            'sup_distance': self.sup_distance,
            'control_energy': self.control.energy,
            'message': self.message,
            'stages': self.stages,
        }
