from experiments.command import ExperimentCommand


class Command(ExperimentCommand):
    help = "Estimate -eps log P over an epsilon sweep and compare with the minimal action"
    kinds = ('sweep',)
