import factory

from drift.factories import DriftSpecFactory, LinearDriftFactory
from noise.factories import AdditiveNoiseFactory, NoiseSpecFactory
from spectral.factories import GridFactory
from .dynamics import Dynamics


class DynamicsFactory(factory.Factory):
    """Canonical p = 4 drift with multiplicative noise on [-pi, pi)"""

    class Meta:
        model = Dynamics

    grid = factory.SubFactory(GridFactory)
    drift = factory.SubFactory(DriftSpecFactory)
    noise = factory.LazyAttribute(lambda o: NoiseSpecFactory(grid=o.grid))
    alpha = 0.75
    dt = 0.01
    steps = 50


class LinearModeDynamicsFactory(DynamicsFactory):
    """
    Single-mode linear problem: F = u/2, one noise mode cos(x)/sqrt(pi)
    with |xi| = 1, so the mode coefficient decays at rate 3/2.
    """

    drift = factory.SubFactory(LinearDriftFactory)
    noise = factory.LazyAttribute(lambda o: AdditiveNoiseFactory(grid=o.grid))
    dt = 1.0 / 400
    steps = 400
