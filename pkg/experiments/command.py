import logging
import time

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from fwlab.exceptions import BlowUpError, FWLabError
from .config import load_config
from .models import ExperimentRun
from .output import RunWriter, to_jsonable
from .runners import RUNNERS

logger = logging.getLogger(__name__)

EXIT_ERROR = 1
EXIT_VERDICT_FAIL = 2


class ExperimentCommand(BaseCommand):
    """
    Shared driver of the config-driven commands: load and validate the
    config, run the experiment, write the run directory and record the run.

    Exit codes: 0 ok, 1 error, 2 verdict FAIL.
    """
    kinds = ()

    def add_arguments(self, parser):
        parser.add_argument('config', help='Path to the TOML experiment config')
        parser.add_argument('--seed', type=int, help='Override [experiment] seed')
        parser.add_argument('--out-dir', help='Run directory (default: FWLAB_OUTPUT_DIR/<kind>-<hash>-seed<seed>)')
        parser.add_argument('--threads', type=int, help='Worker threads (default: FWLAB_THREADS)')

    def load(self, options):
        config = load_config(options['config'])
        if config.kind not in self.kinds:
            raise CommandError(
                f"{options['config']}: experiment kind {config.kind!r} does not belong to this command "
                f"(expected one of {', '.join(self.kinds)})",
                returncode=EXIT_ERROR,
            )
        if options.get('seed') is not None:
            if options['seed'] < 0:
                raise CommandError("--seed must be nonnegative", returncode=EXIT_ERROR)
            config = config.with_seed(options['seed'])
        return config

    def handle(self, *args, **options):
        try:
            config = self.load(options)
        except FWLabError as error:
            raise CommandError(str(error), returncode=EXIT_ERROR)
        threads = options.get('threads')
        if threads is None:
            threads = settings.FWLAB_THREADS
        if threads < 1:
            raise CommandError("--threads must be at least 1", returncode=EXIT_ERROR)
        writer = RunWriter(config, options.get('out_dir'))
        writer.prepare()

        started = time.perf_counter()
        with writer.capture_log():
            logger.info("%s run, config hash %s, seed %d, %d threads", config.kind, config.hash, config.seed, threads)
            try:
                outcome = RUNNERS[config.kind](config, threads)
            except BlowUpError as error:
                self.record(config, threads, writer, ExperimentRun.Status.ERROR, str(error))
                raise CommandError(f"solver blow-up at step {error.step}: {error}", returncode=EXIT_ERROR)
            except (FWLabError, ValueError) as error:
                logger.error("run failed: %s", error)
                self.record(config, threads, writer, ExperimentRun.Status.ERROR, str(error))
                raise CommandError(str(error), returncode=EXIT_ERROR)
            elapsed = time.perf_counter() - started
            logger.info("finished in %.3f s", elapsed)
            for verdict in outcome.verdicts:
                logger.info("verdict %s: %s (%g vs %g)", verdict.name, 'PASS' if verdict.passed else 'FAIL',
                            verdict.value, verdict.threshold)
        writer.write_outcome(outcome, {'total_seconds': elapsed})

        status = ExperimentRun.Status.OK if outcome.passed else ExperimentRun.Status.FAIL
        self.record(config, threads, writer, status, '', outcome.summary, elapsed)
        self.stdout.write(f"{config.kind}: {status} -> {writer.output_dir}")
        if not outcome.passed:
            failed = [verdict.name for verdict in outcome.verdicts if not verdict.passed]
            raise CommandError(f"verdict FAIL: {', '.join(failed)}", returncode=EXIT_VERDICT_FAIL)

    def record(self, config, threads, writer, status, message, summary=None, elapsed=None):
        if not settings.FWLAB_RECORD_RUNS:
            return None
        try:
            return ExperimentRun.objects.create(
                command=self.command_name(),
                experiment=config.kind,
                config_path=config.path,
                config_hash=config.hash,
                seed=config.seed,
                threads=threads,
                status=status,
                output_dir=str(writer.output_dir),
                summary=to_jsonable(summary or {}),
                message=message,
                duration_seconds=elapsed,
            )
        except DatabaseError as error:
            logger.warning("run registry unavailable, run not recorded: %s", error)
            return None

    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]
