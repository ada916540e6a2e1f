from experiments.command import ExperimentCommand


class Command(ExperimentCommand):
    help = "Integrate the controlled skeleton equation for a prescribed control"
    kinds = ('skeleton',)
