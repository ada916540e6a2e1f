import factory

from rate.factories import unit_mode
from skeleton.factories import LinearModeDynamicsFactory
from .events import EventSpec


def benchmark_dynamics():
    return LinearModeDynamicsFactory(dt=0.01, steps=100)


class ThresholdEventFactory(factory.Factory):
    """{(u(T), e_1) >= x} for the linear single-mode benchmark"""

    class Meta:
        model = EventSpec

    class Params:
        dynamics = None

    kind = 'terminal_threshold'
    threshold = 1.0
    observable = factory.LazyAttribute(lambda o: unit_mode(o.dynamics or benchmark_dynamics()))
