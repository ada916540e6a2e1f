from experiments.command import ExperimentCommand


class Command(ExperimentCommand):
    help = "Estimate the probability of a rare event by naive or importance-sampled Monte Carlo"
    kinds = ('mc',)
