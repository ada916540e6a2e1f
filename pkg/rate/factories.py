import factory

from skeleton.factories import LinearModeDynamicsFactory
from spectral.grid import Field
from .problem import RateProblem


def unit_mode(dynamics, mode=0):
    return dynamics.noise.unit_mode(mode)


class RateProblemFactory(factory.Factory):
    """
    Linear single-mode benchmark: reach x e_1 at T = 1 from rest, where
    e_1 = cos(x)/sqrt(pi) and the mode decays at rate 3/2.
    """

    class Meta:
        model = RateProblem

    class Params:
        x = 1.0

    dynamics = factory.SubFactory(LinearModeDynamicsFactory)
    u0 = factory.LazyAttribute(lambda o: Field.zeros(o.dynamics.grid))
    mode = 'endpoint'
    target = factory.LazyAttribute(lambda o: o.x * unit_mode(o.dynamics))
    beta = 20.0
