import math

import factory

from .grid import Grid


class GridFactory(factory.Factory):
    """Periodic grid with L = pi, so the first Fourier mode has |xi| = 1"""

    class Meta:
        model = Grid

    dim = 1
    half_width = math.pi
    points = 64
