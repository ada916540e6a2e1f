"""
Structured diffusion sigma(t, x, s) = m(t) sigma_1(x) + kappa(x) sigma_2(s),
truncated to K modes of l^2.

sigma_2 has the product form sigma_{2,k}(s) = c_k phi(s) with phi from a
built-in family, which fixes the per-mode constants alpha_k (Lipschitz),
beta_k and gamma_k (growth).
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from fwlab.exceptions import GridMismatchError
from spectral.grid import Field, Grid


SIGMA2_FAMILIES = ('zero', 'linear', 'bounded')


@dataclass(frozen=True, eq=False)
class Sigma2Family:
    kind: str
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in SIGMA2_FAMILIES:
            raise ValueError(f"unknown sigma2 family {self.kind!r}, expected one of {SIGMA2_FAMILIES}")
        coefficients = np.asarray(self.coefficients, dtype=float)
        if self.kind == 'zero':
            coefficients = np.zeros_like(coefficients)
        object.__setattr__(self, 'coefficients', coefficients)

    def profile(self, s):
        if self.kind == 'linear':
            return s
        if self.kind == 'bounded':
            return np.sin(s)
        return np.zeros_like(s)

    def profile_slope(self, s):
        if self.kind == 'linear':
            return np.ones_like(s)
        if self.kind == 'bounded':
            return np.cos(s)
        return np.zeros_like(s)

    def evaluate(self, s):
        """sigma_{2,k}(s) for every mode, stacked on a leading axis"""
        return self.coefficients.reshape((-1,) + (1,) * np.ndim(s)) * self.profile(s)

    @property
    def lipschitz(self):
        return np.abs(self.coefficients)

    @property
    def offset(self):
        if self.kind == 'bounded':
            return np.abs(self.coefficients)
        return np.zeros_like(self.coefficients)

    @property
    def growth(self):
        if self.kind == 'linear':
            return np.abs(self.coefficients)
        return np.zeros_like(self.coefficients)

    @property
    def is_zero(self):
        return self.kind == 'zero' or not np.any(self.coefficients)


def constant_envelope(t):
    return 1.0


@dataclass(frozen=True)
class SineEnvelope:
    """m(t) = 1 + amplitude sin(2 pi frequency t)"""
    amplitude: float = 0.0
    frequency: float = 1.0

    def __call__(self, t):
        return 1.0 + self.amplitude * np.sin(2.0 * np.pi * self.frequency * t)


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    grid: Grid
    modes: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    sigma2: Sigma2Family
    envelope: Callable = constant_envelope

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=float)
        kappa = np.asarray(self.kappa, dtype=float)
        if modes.ndim != self.grid.dim + 1 or modes.shape[1:] != self.grid.shape:
            raise GridMismatchError(f"noise modes of shape {modes.shape} do not fit grid {self.grid.shape}")
        if kappa.shape != self.grid.shape:
            raise GridMismatchError(f"kappa of shape {kappa.shape} does not fit grid {self.grid.shape}")
        if self.sigma2.coefficients.shape != (modes.shape[0],):
            raise ValueError(f"sigma2 needs {modes.shape[0]} coefficients, got {self.sigma2.coefficients.shape}")
        object.__setattr__(self, 'modes', modes)
        object.__setattr__(self, 'kappa', kappa)

    @property
    def K(self):
        return self.modes.shape[0]

    @property
    def kappa_l2_sq(self):
        return float(self.grid.cell_volume * np.sum(self.kappa ** 2))

    @property
    def kappa_sup(self):
        return float(np.max(np.abs(self.kappa)))

    @property
    def multiplicative(self):
        return not self.sigma2.is_zero and bool(np.any(self.kappa))

    def summability(self):
        """sum_k alpha_k^2 + beta_k^2 + gamma_k^2"""
        family = self.sigma2
        return float(np.sum(family.lipschitz ** 2 + family.offset ** 2 + family.growth ** 2))

    def growth_constant(self):
        """L_1 = 4 ||kappa||^2 sum beta_k^2 + 4 ||kappa||_inf^2 sum gamma_k^2"""
        family = self.sigma2
        return 4.0 * self.kappa_l2_sq * float(np.sum(family.offset ** 2)) \
            + 4.0 * self.kappa_sup ** 2 * float(np.sum(family.growth ** 2))

    def additive_norms_sq(self):
        return self.grid.cell_volume * np.sum(self.modes ** 2, axis=self.grid.axes)

    def unit_mode(self, k=0):
        """Mode k normalized in L^2"""
        return Field(self.grid, self.modes[k] / np.sqrt(self.additive_norms_sq()[k]))

    def truncated(self, modes):
        """Same noise keeping only the first `modes` modes"""
        return NoiseSpec(
            self.grid,
            self.modes[:modes],
            self.kappa,
            Sigma2Family(self.sigma2.kind, self.sigma2.coefficients[:modes]),
            self.envelope,
        )


def mode_amplitudes(K, amplitude, decay):
    """a_k = amplitude k^{-r}, k = 1..K"""
    return amplitude * np.arange(1, K + 1, dtype=float) ** (-decay)


def trigonometric_mode(grid, k):
    """
    k-th unit-norm Fourier mode along the first axis:
    cos(pi x/L), sin(pi x/L), cos(2 pi x/L), ...
    """
    L = grid.half_width
    frequency = (k + 1) // 2
    x = grid.coordinates[0]
    wave = np.cos(np.pi * frequency * x / L) if k % 2 else np.sin(np.pi * frequency * x / L)
    return wave / np.sqrt(grid.cell_volume * np.sum(wave ** 2))


def fourier_modes(grid, K, amplitude=1.0, decay=1.0):
    amplitudes = mode_amplitudes(K, amplitude, decay)
    return np.stack([a * trigonometric_mode(grid, k) for k, a in zip(range(1, K + 1), amplitudes)])


def gaussian_modes(grid, K, amplitude=1.0, decay=1.0, width=1.0):
    """Fourier modes localized by a Gaussian envelope, so they decay inside the box"""
    window = np.exp(-grid.radius ** 2 / (2.0 * width ** 2))
    return fourier_modes(grid, K, amplitude, decay) * window


def kappa_profile(grid, shape='gaussian', amplitude=1.0, width=1.0):
    if shape == 'zero':
        return np.zeros(grid.shape)
    if shape == 'constant':
        return np.full(grid.shape, float(amplitude))
    if shape == 'gaussian':
        return amplitude * np.exp(-grid.radius ** 2 / (2.0 * width ** 2))
    raise ValueError(f"unknown kappa shape {shape!r}")


def build_noise(grid, K, profile='gaussian', amplitude=1.0, decay=1.0, width=1.0,
                kappa_shape='gaussian', kappa_amplitude=1.0, kappa_width=1.0,
                sigma2='linear', coupling=1.0, envelope=None):
    """NoiseSpec with decaying amplitudes a_k, c_k proportional to k^{-decay}"""
    if K < 1:
        raise ValueError(f"noise needs at least one mode, got K={K}")
    if profile == 'fourier':
        modes = fourier_modes(grid, K, amplitude, decay)
    elif profile == 'gaussian':
        modes = gaussian_modes(grid, K, amplitude, decay, width)
    else:
        raise ValueError(f"unknown noise profile {profile!r}")
    return NoiseSpec(
        grid=grid,
        modes=modes,
        kappa=kappa_profile(grid, kappa_shape, kappa_amplitude, kappa_width),
        sigma2=Sigma2Family(sigma2, mode_amplitudes(K, coupling, decay)),
        envelope=envelope or constant_envelope,
    )
