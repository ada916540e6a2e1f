from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from fwlab.exceptions import NonFiniteError
from spectral.grid import Field


@dataclass(frozen=True)
class DriftSpec:
    """
    Nonlinear drift F(t, x, u) with its derivative in u and the declared
    constants of the structure conditions.

    The psi functions are constant envelopes. Any pair of pointwise
    evaluators (t, u) -> array may replace the canonical family
    F(u) = a |u|^{p-2} u - b u.
    """
    p: float
    a: float
    b: float = 0.0
    lambda1: float = 1.0
    psi1_bound: float = 0.0
    lambda2: float = 1.0
    psi2_bound: float = 0.0
    psi3_bound: float = 0.0
    lambda3: float = 1.0
    psi4_bound: float = 0.0
    lambda4: float = 1.0
    psi5_bound: float = 0.0
    function: Optional[Callable] = None
    derivative: Optional[Callable] = None

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"drift exponent p must be >= 2, got {self.p}")
        if (self.function is None) != (self.derivative is None):
            raise ValueError("a custom drift needs both the function and its derivative")

    @classmethod
    def canonical(cls, p=4.0, a=1.0, b=0.0, **overrides):
        """Canonical family with constants that satisfy the conditions when a > 0"""
        magnitude = abs(a)
        if p == 2:
            lambda1, psi1 = a - b, 0.0
        elif b > 0:
            lambda1 = magnitude / 2.0
            psi1 = 0.0
            if a > 0:
                # sup over u of b u^2 - (a/2) |u|^p
                peak = (4.0 * b / (p * a)) ** (2.0 / (p - 2.0))
                psi1 = b * (1.0 - 2.0 / p) * peak
        else:
            lambda1, psi1 = magnitude, 0.0
        lambda2 = max(magnitude * (p - 1.0), 1.0)
        constants = dict(
            lambda1=lambda1,
            psi1_bound=psi1,
            lambda2=lambda2,
            psi2_bound=b / lambda2,
            psi3_bound=b,
            lambda3=magnitude + b,
            psi4_bound=b,
            lambda4=magnitude * 2.0 ** (2.0 - p),
            psi5_bound=b,
        )
        constants.update(overrides)
        return cls(p=p, a=a, b=b, **constants)

    @property
    def is_canonical(self):
        return self.function is None

    def evaluate(self, t, u):
        if self.function is not None:
            return self.function(t, u)
        with np.errstate(over='ignore', invalid='ignore'):
            return self.a * np.abs(u) ** (self.p - 2.0) * u - self.b * u

    def slope(self, t, u):
        """dF/du"""
        if self.derivative is not None:
            return self.derivative(t, u)
        with np.errstate(over='ignore', invalid='ignore'):
            return self.a * (self.p - 1.0) * np.abs(u) ** (self.p - 2.0) - self.b


def _as_field(grid, values, what, t):
    if not np.isfinite(values).all():
        raise NonFiniteError(f"{what} produced non-finite values at t={t}")
    return Field(grid, values)


def eval_F(spec, t, f):
    return _as_field(f.grid, spec.evaluate(t, f.values), 'drift', t)


def eval_dF(spec, t, f):
    return _as_field(f.grid, spec.slope(t, f.values), 'drift derivative', t)
