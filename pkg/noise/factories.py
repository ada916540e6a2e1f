import factory

from spectral.factories import GridFactory
from .spec import build_noise


class NoiseSpecFactory(factory.Factory):
    """Multiplicative noise with Gaussian-localized modes"""

    class Meta:
        model = dict

    grid = factory.SubFactory(GridFactory)
    K = 4
    profile = 'gaussian'
    amplitude = 1.0
    decay = 1.0
    width = 1.0
    kappa_shape = 'gaussian'
    kappa_amplitude = 0.5
    kappa_width = 1.0
    sigma2 = 'linear'
    coupling = 1.0

    @classmethod
    def _create(cls, model_class, **kwargs):
        return build_noise(**kwargs)


class AdditiveNoiseFactory(NoiseSpecFactory):
    """Single Fourier mode c cos(x)/sqrt(pi), no state dependence"""

    K = 1
    profile = 'fourier'
    kappa_shape = 'zero'
    sigma2 = 'zero'
