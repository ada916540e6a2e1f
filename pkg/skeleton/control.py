from dataclasses import dataclass, field

import numpy as np

from fwlab.exceptions import NonFiniteError


@dataclass(frozen=True, eq=False)
class Control:
    """
    Piecewise-constant control v_m on the solver time grid, one row per
    step and one column per noise mode.
    """
    dt: float
    values: np.ndarray = field(repr=False)
    energy: float = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"control values must have shape (steps, modes), got {values.shape}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not np.isfinite(values).all():
            raise NonFiniteError("control contains non-finite entries")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'energy', float(self.dt * np.sum(values ** 2)))

    @classmethod
    def zeros(cls, steps, modes, dt):
        return cls(dt, np.zeros((steps, modes)))

    @classmethod
    def from_function(cls, steps, modes, dt, function):
        """Sample function(t) -> K-vector at the left step points t_m = m dt"""
        times = dt * np.arange(steps)
        return cls(dt, np.array([np.broadcast_to(function(t), (modes,)) for t in times], dtype=float))

    @property
    def steps(self):
        return self.values.shape[0]

    @property
    def modes(self):
        return self.values.shape[1]

    @property
    def horizon(self):
        return self.dt * self.steps

    def l2_norm(self):
        """Norm in L^2(0, T; l^2)"""
        return float(np.sqrt(self.energy))

    def _check_compatible(self, other):
        if other.values.shape != self.values.shape or not np.isclose(other.dt, self.dt):
            raise ValueError("controls live on different time grids")

    def __add__(self, other):
        self._check_compatible(other)
        return Control(self.dt, self.values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return Control(self.dt, self.values - other.values)

    def __mul__(self, scalar):
        return Control(self.dt, self.values * scalar)

    __rmul__ = __mul__
