import csv
import json
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from fwlab.exceptions import ConfigError
from property_lab.oracles import discrete_gramian, gaussian_tail
from .config import load_config, locate, parse_config
from .factories import ExperimentRunFactory, LinearConfigFactory
from .forms import FloatListField, IntegerListField
from .models import ExperimentRun
from .output import RESOLVED_CONFIG, RESULT_JSON, RESULTS_FILE, RUN_LOG

BENCHMARKS = Path(settings.BASE_DIR) / 'benchmarks'

# x^2 / (2 W(1)) for the single-mode linear problem
LQ_ACTION = 1.578594

BAD_KEY_CONFIG = """\
[grid]
points = 64

[solver]
dt = 0.01
stepz = 10

[experiment]
kind = "skeleton"
"""


def read_rows(path):
    with open(path, newline='', encoding='utf-8') as handle:
        return list(csv.DictReader(handle))


class ConfigParseTest(SimpleTestCase):
    """Test cases for config parsing and validation"""

    def test_defaults_are_filled(self):
        """Test omitted keys resolve to their defaults"""
        config = parse_config(LinearConfigFactory())
        self.assertEqual(config.kind, 'skeleton')
        self.assertEqual(config.seed, 0)
        self.assertEqual(config.grid['dim'], 1)
        self.assertEqual(config.drift['taming'], 'auto')
        self.assertEqual(config.noise['amplitude'], 1.0)
        self.assertEqual(config.experiment['control'], 'zero')

    def test_unknown_key_reports_line(self):
        """Test an unknown key is reported with its line"""
        with self.assertRaises(ConfigError) as cm:
            parse_config(BAD_KEY_CONFIG, 'bad.toml')
        self.assertEqual(cm.exception.line, 6)
        self.assertEqual(cm.exception.key, 'stepz')
        self.assertIn('bad.toml:6:', str(cm.exception))

    def test_unknown_section(self):
        """Test an unknown section is rejected"""
        text = LinearConfigFactory() + '\n[plotting]\ncolor = "red"\n'
        with self.assertRaises(ConfigError) as cm:
            parse_config(text)
        self.assertEqual(cm.exception.key, 'plotting')
        self.assertEqual(cm.exception.line, locate(text, 'plotting'))

    def test_invalid_toml(self):
        """Test a TOML syntax error carries the line"""
        with self.assertRaises(ConfigError) as cm:
            parse_config('[grid]\npoints = \n')
        self.assertEqual(cm.exception.line, 2)

    def test_missing_kind(self):
        """Test the experiment kind is required"""
        with self.assertRaises(ConfigError):
            parse_config(LinearConfigFactory(experiment={'seed': 1}))

    def test_unknown_kind(self):
        """Test an unknown experiment kind is rejected"""
        with self.assertRaises(ConfigError) as cm:
            parse_config(LinearConfigFactory(experiment={'kind': 'bogus'}))
        self.assertEqual(cm.exception.key, 'kind')

    def test_missing_grid(self):
        """Test the grid section is required"""
        with self.assertRaises(ConfigError):
            parse_config('[experiment]\nkind = "skeleton"\n')

    def test_points_power_of_two(self):
        """Test the grid size must be a power of two"""
        with self.assertRaises(ConfigError) as cm:
            parse_config(LinearConfigFactory(grid={'points': 48}))
        self.assertEqual(cm.exception.key, 'points')

    def test_invalid_value(self):
        """Test out-of-range values are rejected"""
        with self.assertRaises(ConfigError):
            parse_config(LinearConfigFactory(solver={'dt': -0.01}))
        with self.assertRaises(ConfigError):
            parse_config(LinearConfigFactory(experiment={'kind': 'mc', 'samples': 10}))
        for alpha in (0.0, 1.5):
            with self.subTest(alpha=alpha), self.assertRaises(ConfigError) as cm:
                parse_config(LinearConfigFactory(solver={'alpha': alpha, 'dt': 0.01, 'steps': 100}), 'alpha.toml')
            self.assertEqual(cm.exception.key, 'alpha')
            self.assertIsNotNone(cm.exception.line)

    def test_check_range_order(self):
        """Test the sampled u range must be increasing"""
        with self.assertRaises(ConfigError) as cm:
            parse_config(LinearConfigFactory(experiment={'kind': 'check', 'u_min': 1.0, 'u_max': -1.0}))
        self.assertEqual(cm.exception.key, 'u_max')

    def test_missing_file(self):
        """Test an unreadable path is a config error"""
        with self.assertRaises(ConfigError):
            load_config('/nonexistent/config.toml')

    def test_hash_round_trip(self):
        """Test the resolved config reloads to the same hash"""
        config = load_config(BENCHMARKS / 'lq_rate.toml')
        text = config.dumps()
        self.assertTrue(text.startswith(f'# config_hash = {config.hash}\n'))
        self.assertEqual(parse_config(text).hash, config.hash)

    def test_hash_ignores_formatting(self):
        """Test comments and explicit defaults do not change the hash"""
        plain = parse_config(LinearConfigFactory())
        explicit = parse_config('# comment\n' + LinearConfigFactory(experiment={'kind': 'skeleton', 'seed': 0}))
        self.assertEqual(plain.hash, explicit.hash)

    def test_seed_override(self):
        """Test overriding the seed changes the hash only of the copy"""
        config = parse_config(LinearConfigFactory())
        reseeded = config.with_seed(7)
        self.assertEqual(reseeded.seed, 7)
        self.assertEqual(config.seed, 0)
        self.assertNotEqual(reseeded.hash, config.hash)
        self.assertEqual(len(config.hash), 64)

    def test_benchmarks_parse(self):
        """Test every bundled benchmark config validates"""
        paths = sorted(BENCHMARKS.glob('*.toml'))
        self.assertGreater(len(paths), 0)
        for path in paths:
            with self.subTest(path=path.name):
                load_config(path)


class ListFieldTest(SimpleTestCase):
    """Test cases for list config fields"""

    def test_lists_and_strings(self):
        self.assertEqual(FloatListField().clean([0.2, 0.1]), [0.2, 0.1])
        self.assertEqual(FloatListField().clean('0.2, 0.1'), [0.2, 0.1])
        self.assertEqual(IntegerListField().clean([1, 2, 4]), [1, 2, 4])

    def test_rejects_bad_entries(self):
        with self.assertRaises(ValidationError):
            FloatListField().clean([1.0, 'x'])
        with self.assertRaises(ValidationError):
            FloatListField().clean([1.0, float('inf')])
        with self.assertRaises(ValidationError):
            FloatListField().clean(3.0)


class ExperimentCommandTest(TestCase):
    """Test cases for the experiment commands"""

    def setUp(self):
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.root = Path(directory.name)
        overrides = override_settings(FWLAB_OUTPUT_DIR=self.root / 'runs')
        overrides.enable()
        self.addCleanup(overrides.disable)

    def write_config(self, text, name='config.toml'):
        path = self.root / name
        path.write_text(text, encoding='utf-8')
        return str(path)

    def run_command(self, command, path, **options):
        """Run a command; return its exit code and stdout"""
        out = StringIO()
        try:
            call_command(command, path, stdout=out, **options)
        except CommandError as error:
            return error.returncode, out.getvalue()
        return 0, out.getvalue()

    def test_skeleton_run_directory(self):
        """Test a run writes every output file tagged with the config hash"""
        path = self.write_config(LinearConfigFactory(experiment={'kind': 'skeleton', 'control': 'constant',
                                                                 'control_amplitude': 1.0}))
        config = load_config(path)
        out_dir = self.root / 'skeleton'
        code, output = self.run_command('skeleton', path, out_dir=str(out_dir))
        self.assertEqual(code, 0)
        self.assertIn('skeleton: OK', output)

        rows = read_rows(out_dir / RESULTS_FILE)
        self.assertEqual(list(rows[0]), ['t', 'l2', 'h_alpha', 'lp', 'config_hash'])
        self.assertTrue(all(row['config_hash'] == config.hash for row in rows))
        self.assertEqual(float(rows[0]['l2']), 0.0)

        result = json.loads((out_dir / RESULT_JSON).read_text())
        self.assertEqual(set(result), {'experiment', 'config_hash', 'seed', 'verdicts', 'summary', 'timings'})
        self.assertEqual(result['config_hash'], config.hash)
        self.assertAlmostEqual(result['summary']['action'], 0.5, places=10)
        self.assertEqual(load_config(out_dir / RESOLVED_CONFIG).hash, config.hash)
        self.assertIn('skeleton run, config hash', (out_dir / RUN_LOG).read_text())

    def test_default_output_directory(self):
        """Test runs land under FWLAB_OUTPUT_DIR by kind, hash and seed"""
        path = self.write_config(LinearConfigFactory())
        config = load_config(path)
        code, _ = self.run_command('skeleton', path, seed=3)
        self.assertEqual(code, 0)
        expected = self.root / 'runs' / f"skeleton-{config.with_seed(3).hash[:12]}-seed3"
        self.assertTrue((expected / RESULT_JSON).exists())

    def test_check_conditions_benchmark(self):
        """Test the canonical drift passes every condition"""
        out_dir = self.root / 'check'
        code, _ = self.run_command('check_conditions', str(BENCHMARKS / 'canonical_drift.toml'),
                                   out_dir=str(out_dir))
        self.assertEqual(code, 0)
        rows = read_rows(out_dir / RESULTS_FILE)
        self.assertGreater(len(rows), 0)
        for row in rows:
            self.assertGreaterEqual(float(row['margin']), 0.0, msg=row['condition'])
            self.assertEqual(row['holds'], 'true')

    def test_rate_run_matches_gramian(self):
        """Test the rate command recovers the linear minimal action"""
        path = self.write_config(LinearConfigFactory(experiment={
            'kind': 'rate', 'expected_action': LQ_ACTION, 'action_tolerance': 0.02,
        }))
        out_dir = self.root / 'rate'
        code, _ = self.run_command('rate', path, out_dir=str(out_dir))
        self.assertEqual(code, 0)
        result = json.loads((out_dir / RESULT_JSON).read_text())
        self.assertTrue(result['verdicts']['action_matches_expected']['passed'])
        self.assertLess(abs(result['summary']['action'] / LQ_ACTION - 1.0), 0.02)
        self.assertEqual(len(read_rows(out_dir / 'control.csv')), 100)

    def test_verdict_failure_exit_code(self):
        """Test a failed verdict exits with 2 and is still recorded"""
        path = self.write_config(LinearConfigFactory(experiment={
            'kind': 'rate', 'expected_action': 3.0, 'action_tolerance': 0.02,
        }))
        out_dir = self.root / 'fail'
        code, output = self.run_command('rate', path, out_dir=str(out_dir))
        self.assertEqual(code, 2)
        self.assertIn('rate: FAIL', output)
        result = json.loads((out_dir / RESULT_JSON).read_text())
        self.assertFalse(result['verdicts']['action_matches_expected']['passed'])
        self.assertEqual(ExperimentRun.objects.get().status, ExperimentRun.Status.FAIL)

    def test_kind_mismatch_exit_code(self):
        """Test a config of another kind exits with 1"""
        path = self.write_config(LinearConfigFactory())
        code, _ = self.run_command('mc', path)
        self.assertEqual(code, 1)
        self.assertFalse(ExperimentRun.objects.exists())

    def test_config_error_exit_code(self):
        """Test an invalid config exits with 1"""
        path = self.write_config(BAD_KEY_CONFIG)
        code, _ = self.run_command('skeleton', path)
        self.assertEqual(code, 1)

    def test_bad_options_exit_code(self):
        """Test negative seeds and zero threads exit with 1"""
        path = self.write_config(LinearConfigFactory())
        self.assertEqual(self.run_command('skeleton', path, seed=-1)[0], 1)
        self.assertEqual(self.run_command('skeleton', path, threads=0)[0], 1)

    def test_run_error_is_recorded(self):
        """Test a failing run exits with 1 and records an error"""
        path = self.write_config(LinearConfigFactory(experiment={
            'kind': 'sweep', 'estimator': 'naive', 'epsilons': [2.0, 1.0], 'rate': LQ_ACTION, 'samples': 100,
        }))
        code, _ = self.run_command('sweep', path, out_dir=str(self.root / 'error'))
        self.assertEqual(code, 1)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.status, ExperimentRun.Status.ERROR)
        self.assertIn('three epsilon values', run.message)

    def test_mc_matches_gaussian_tail(self):
        """Test the naive estimate against the exact Gaussian tail"""
        expected = gaussian_tail(1.0, discrete_gramian(1.0, 1.0, 0.5, 0.01, 100))
        path = self.write_config(LinearConfigFactory(experiment={
            'kind': 'mc', 'epsilon': 1.0, 'estimator': 'naive', 'samples': 1000,
            'expected_probability': expected, 'seed': 4,
        }))
        out_dir = self.root / 'mc'
        code, _ = self.run_command('mc', path, out_dir=str(out_dir))
        self.assertEqual(code, 0)
        rows = read_rows(out_dir / RESULTS_FILE)
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]['method'], 'naive')
        self.assertEqual(int(rows[0]['samples']), 1000)

    def sweep_config(self):
        return self.write_config(LinearConfigFactory(experiment={
            'kind': 'sweep', 'estimator': 'naive', 'epsilons': [4.0, 2.0, 1.0],
            'rate': LQ_ACTION, 'samples': 1000, 'seed': 5,
        }))

    def test_sweep_columns(self):
        """Test the sweep table layout"""
        out_dir = self.root / 'sweep'
        code, _ = self.run_command('sweep', self.sweep_config(), out_dir=str(out_dir))
        self.assertIn(code, (0, 2))
        rows = read_rows(out_dir / RESULTS_FILE)
        self.assertEqual([float(row['epsilon']) for row in rows], [4.0, 2.0, 1.0])
        for column in ('epsilon', 'neg_eps_log_p', 'ci_lo', 'ci_hi', 'ess', 'config_hash'):
            self.assertIn(column, rows[0])
        result = json.loads((out_dir / RESULT_JSON).read_text())
        self.assertIn('smallest_epsilon_gap', result['verdicts'])

    def test_results_independent_of_threads(self):
        """Test the same seed gives byte-identical results for 1 and 4 threads"""
        path = self.sweep_config()
        single, parallel = self.root / 'one', self.root / 'four'
        self.run_command('sweep', path, out_dir=str(single), threads=1)
        self.run_command('sweep', path, out_dir=str(parallel), threads=4)
        self.assertEqual((single / RESULTS_FILE).read_bytes(), (parallel / RESULTS_FILE).read_bytes())

    def test_run_registry(self):
        """Test runs are recorded and listed"""
        path = self.write_config(LinearConfigFactory())
        config = load_config(path)
        self.run_command('skeleton', path, threads=2)
        run = ExperimentRun.objects.get()
        self.assertEqual(run.command, 'skeleton')
        self.assertEqual(run.config_hash, config.hash)
        self.assertEqual(run.threads, 2)
        self.assertTrue(run.passed)

        out = StringIO()
        call_command('runs', stdout=out)
        self.assertIn(config.hash[:12], out.getvalue())

    @override_settings(FWLAB_RECORD_RUNS=False)
    def test_recording_disabled(self):
        path = self.write_config(LinearConfigFactory())
        self.assertEqual(self.run_command('skeleton', path)[0], 0)
        self.assertFalse(ExperimentRun.objects.exists())


class RunsCommandTest(TestCase):
    """Test cases for the run listing"""

    def list_runs(self, **options):
        out = StringIO()
        call_command('runs', stdout=out, **options)
        return out.getvalue()

    def test_empty_registry(self):
        self.assertIn('no recorded runs', self.list_runs())

    def test_filters(self):
        """Test filtering by status and experiment"""
        ok = ExperimentRunFactory()
        failed = ExperimentRunFactory(status=ExperimentRun.Status.FAIL)
        other = ExperimentRunFactory(experiment='rate', command='rate')
        output = self.list_runs(status='FAIL')
        self.assertIn(failed.config_hash[:12], output)
        self.assertNotIn(ok.config_hash[:12], output)
        output = self.list_runs(experiment='rate')
        self.assertIn(other.config_hash[:12], output)
        self.assertNotIn(failed.config_hash[:12], output)

    def test_limit(self):
        ExperimentRunFactory.create_batch(5)
        self.assertEqual(len(self.list_runs(limit=3).splitlines()), 3)

    def test_model_str(self):
        run = ExperimentRunFactory(seed=6)
        self.assertIn('seed=6', str(run))
        self.assertIn(run.config_hash[:12], str(run))
        self.assertTrue(run.passed)
        self.assertFalse(ExperimentRunFactory(status=ExperimentRun.Status.ERROR).passed)


class BenchmarkDataTest(SimpleTestCase):
    """Test cases for the benchmark oracle script"""

    def test_recorded_action_matches_oracle(self):
        """Test the configs agree with the oracles and nothing is written"""
        from create_benchmark_data import benchmark_values, check_expected

        values = benchmark_values()
        self.assertAlmostEqual(values['minimal_action'], LQ_ACTION, places=5)
        self.assertTrue(check_expected(values))
        self.assertFalse((BENCHMARKS / 'oracles.json').exists())
