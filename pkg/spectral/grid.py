from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from fwlab.exceptions import GridMismatchError, NonFiniteError


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic grid on the box [-L, L)^n
    """
    dim: int
    half_width: float
    points: int

    def __post_init__(self):
        if not 1 <= self.dim <= 3:
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.points < 4 or self.points & (self.points - 1):
            raise ValueError(f"points must be a power of two >= 4, got {self.points}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.points

    @property
    def shape(self):
        return (self.points,) * self.dim

    @property
    def axes(self):
        """Trailing array axes holding the spatial dimensions"""
        return tuple(range(-self.dim, 0))

    @property
    def cell_volume(self):
        return self.spacing ** self.dim

    @property
    def volume(self):
        return (2.0 * self.half_width) ** self.dim

    @cached_property
    def coordinates(self):
        x = -self.half_width + self.spacing * np.arange(self.points)
        return np.meshgrid(*([x] * self.dim), indexing='ij')

    @cached_property
    def radius(self):
        return np.sqrt(sum(c ** 2 for c in self.coordinates))

    @cached_property
    def wavenumbers(self):
        """xi_j = pi j / L in FFT ordering"""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    @cached_property
    def wavenumber_norm(self):
        """|xi| on the full FFT grid"""
        mesh = np.meshgrid(*([self.wavenumbers] * self.dim), indexing='ij')
        return np.sqrt(sum(k ** 2 for k in mesh))

    @cached_property
    def real_wavenumber_norm(self):
        """|xi| on the half-spectrum layout of numpy.fft.rfftn"""
        half = 2.0 * np.pi * np.fft.rfftfreq(self.points, d=self.spacing)
        mesh = np.meshgrid(*([self.wavenumbers] * (self.dim - 1) + [half]), indexing='ij')
        return np.sqrt(sum(k ** 2 for k in mesh))

    def check_shape(self, values):
        if values.shape[-self.dim:] != self.shape:
            raise GridMismatchError(f"array of shape {values.shape} does not fit grid {self.shape}")


@dataclass(frozen=True, eq=False)
class Field:
    """
    Real grid function on a periodic box
    """
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridMismatchError(f"values of shape {values.shape} do not fit grid {self.grid.shape}")
        if not np.isfinite(values).all():
            raise NonFiniteError("field contains non-finite entries")
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid, function):
        """Sample function(*coordinates) on the grid"""
        return cls(grid, np.array(np.broadcast_to(function(*grid.coordinates), grid.shape), dtype=float))

    def __add__(self, other):
        check_same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        check_same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    """
    Fourier coefficients of a field, FFT ordering, unitary normalization
    """
    grid: Grid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != self.grid.shape:
            raise GridMismatchError(f"coefficients of shape {coeffs.shape} do not fit grid {self.grid.shape}")
        object.__setattr__(self, 'coeffs', coeffs)

    def is_hermitian(self, rtol=1e-12):
        """True when the coefficients of xi and -xi are conjugate"""
        mirrored = self.coeffs
        for axis in range(self.grid.dim):
            mirrored = np.roll(np.flip(mirrored, axis=axis), 1, axis=axis)
        scale = max(np.abs(self.coeffs).max(), 1.0)
        return np.abs(self.coeffs - np.conj(mirrored)).max() <= rtol * scale


def check_same_grid(*fields):
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {other.grid}")
    return grid
