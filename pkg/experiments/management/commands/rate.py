from experiments.command import ExperimentCommand


class Command(ExperimentCommand):
    help = "Minimize the action over controls reaching a target"
    kinds = ('rate',)
