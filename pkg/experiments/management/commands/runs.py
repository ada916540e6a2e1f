from django.core.management.base import BaseCommand

from experiments.models import ExperimentRun


class Command(BaseCommand):
    help = "List recorded experiment runs, newest first"

    def add_arguments(self, parser):
        parser.add_argument('--experiment', help='Only runs of this experiment kind')
        parser.add_argument('--status', choices=ExperimentRun.Status.values, help='Only runs with this status')
        parser.add_argument('--limit', type=int, default=20, help='Maximum number of runs to list')

    def handle(self, *args, **options):
        runs = ExperimentRun.objects.all()
        if options['experiment']:
            runs = runs.filter(experiment=options['experiment'])
        if options['status']:
            runs = runs.filter(status=options['status'])
        runs = runs[:options['limit']]
        if not runs:
            self.stdout.write("no recorded runs")
            return
        for run in runs:
            self.stdout.write(
                f"{run.created_at:%Y-%m-%d %H:%M:%S}  {run.status:<5}  {run.experiment:<16}  "
                f"{run.config_hash[:12]}  seed={run.seed}  {run.output_dir}"
            )
