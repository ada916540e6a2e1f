from experiments.command import ExperimentCommand
from experiments.forms import LAB_KINDS


class Command(ExperimentCommand):
    help = "Run a property-lab experiment (tails, weak_convergence, moments, solution_map)"
    kinds = LAB_KINDS
