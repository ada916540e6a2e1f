"""
Shared parameters of the controlled and stochastic equations and the
exponential Euler step both solvers use.

One step maps u^m to

    u^{m+1} = S(dt) [ u^m + dt (g - f(t_m, u^m)) + sigma(t_m, u^m) w^m ]

where S is the fractional heat semigroup, f the (optionally tamed) drift
and w^m the K-vector driving the step: dt v_m for the skeleton,
sqrt(eps) dW^m (+ dt v_m when shifted) for the SPDE.
"""
import dataclasses
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from drift.spec import DriftSpec
from fwlab.exceptions import GridMismatchError
from noise.operators import apply_sigma_values
from noise.spec import NoiseSpec
from spectral.grid import Field, Grid
from spectral.transforms import apply_multiplier, check_alpha, semigroup_symbol

# Drift exponent from which taming is switched on when not configured
TAMING_EXPONENT = 4.0


@dataclass(frozen=True, eq=False)
class Dynamics:
    grid: Grid
    drift: DriftSpec
    noise: NoiseSpec
    alpha: float
    dt: float
    steps: int
    forcing: Optional[Field] = None
    taming: Optional[bool] = None

    def __post_init__(self):
        check_alpha(self.alpha)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps}")
        if self.noise.grid != self.grid:
            raise GridMismatchError("noise modes live on a different grid")
        if self.forcing is not None and self.forcing.grid != self.grid:
            raise GridMismatchError("forcing lives on a different grid")

    @property
    def horizon(self):
        return self.dt * self.steps

    @property
    def times(self):
        return self.dt * np.arange(self.steps + 1)

    @property
    def K(self):
        return self.noise.K

    @property
    def tamed(self):
        if self.taming is None:
            return self.drift.p >= TAMING_EXPONENT
        return self.taming

    @cached_property
    def propagator(self):
        """exp(-dt |xi|^{2 alpha}) on the half spectrum"""
        return semigroup_symbol(self.grid, self.alpha, self.dt)

    @cached_property
    def forcing_values(self):
        if self.forcing is None:
            return np.zeros(self.grid.shape)
        return self.forcing.values

    def refined(self, factor):
        """Same problem on a time grid `factor` times finer"""
        return dataclasses.replace(self, dt=self.dt / factor, steps=self.steps * factor)

    def with_steps(self, dt, steps):
        return dataclasses.replace(self, dt=dt, steps=steps)

    def drift_values(self, t, u):
        F = self.drift.evaluate(t, u)
        if self.tamed:
            return F / (1.0 + self.dt * np.abs(F))
        return F

    def drift_slope_values(self, t, u):
        """Derivative in u of drift_values"""
        dF = self.drift.slope(t, u)
        if self.tamed:
            return dF / (1.0 + self.dt * np.abs(self.drift.evaluate(t, u))) ** 2
        return dF

    def semigroup_step(self, values):
        return apply_multiplier(values, self.grid, self.propagator)

    def advance(self, m, u, increment):
        """
        One exponential Euler step from u^m; u may carry a leading batch
        axis, matched by a leading axis on the K-vector increment.
        """
        t = m * self.dt
        with np.errstate(all='ignore'):
            inner = u + self.dt * (self.forcing_values - self.drift_values(t, u))
            inner = inner + apply_sigma_values(self.noise, t, u, increment)
            return self.semigroup_step(inner)
