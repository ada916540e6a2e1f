import factory

from .stream import NoiseStream


class NoiseStreamFactory(factory.Factory):
    """Streams of one master seed, one trajectory index per instance"""

    class Meta:
        model = NoiseStream

    seed = 2024
    index = factory.Sequence(lambda n: n)
