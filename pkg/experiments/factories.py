import factory
import tomli_w

from .models import ExperimentRun


class LinearConfigFactory(factory.Factory):
    """
    TOML text of a config on the single-mode linear problem. Override the
    experiment table (and any other section) with plain dicts.
    """

    class Meta:
        model = dict

    grid = factory.LazyFunction(lambda: {'points': 64})
    drift = factory.LazyFunction(lambda: {'p': 2.0, 'a': 0.5, 'b': 0.0})
    noise = factory.LazyFunction(lambda: {'K': 1, 'profile': 'fourier', 'kappa_shape': 'zero', 'sigma2': 'zero'})
    solver = factory.LazyFunction(lambda: {'alpha': 0.75, 'dt': 0.01, 'steps': 100})
    experiment = factory.LazyFunction(lambda: {'kind': 'skeleton'})

    @classmethod
    def _create(cls, model_class, **sections):
        return tomli_w.dumps(sections)


class ExperimentRunFactory(factory.django.DjangoModelFactory):
    class Meta:
        model = ExperimentRun

    command = 'sweep'
    experiment = 'sweep'
    config_path = 'benchmarks/ou_sweep.toml'
    config_hash = factory.Sequence(lambda n: f'{n:064x}')
    seed = 6
    threads = 1
    status = ExperimentRun.Status.OK
    output_dir = factory.LazyAttribute(lambda o: f'runs/{o.experiment}-{o.config_hash[:12]}-seed{o.seed}')
    summary = factory.LazyFunction(dict)
