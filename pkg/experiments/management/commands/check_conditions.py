from experiments.command import ExperimentCommand


class Command(ExperimentCommand):
    help = "Check the drift and noise structure conditions on sample clouds"
    kinds = ('check',)
