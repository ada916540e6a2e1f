from experiments.command import ExperimentCommand


class Command(ExperimentCommand):
    help = "Simulate one path of the stochastic equation (optionally Girsanov-shifted)"
    kinds = ('simulate',)
