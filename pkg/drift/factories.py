import factory

from .spec import DriftSpec


class DriftSpecFactory(factory.Factory):
    """Canonical drift a |u|^{p-2} u - b u"""

    class Meta:
        model = DriftSpec

    p = 4.0
    a = 1.0
    b = 0.0

    @classmethod
    def _create(cls, model_class, *args, **kwargs):
        return model_class.canonical(*args, **kwargs)


class LinearDriftFactory(DriftSpecFactory):
    """F(u) = (a - b) u"""

    p = 2.0
    a = 0.5
