"""
Run directory layout:

    results.csv           data rows, plus a config_hash column
    result.json           experiment, config_hash, seed, verdicts, summary, timings
    resolved_config.toml  exact inputs, headed by the config hash
    run.log               log records of the run
"""
import csv
import json
import logging
import math
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from django.conf import settings

RESULTS_FILE = 'results.csv'
RESULT_JSON = 'result.json'
RESOLVED_CONFIG = 'resolved_config.toml'
RUN_LOG = 'run.log'


def default_output_dir(config):
    return Path(settings.FWLAB_OUTPUT_DIR) / f"{config.kind}-{config.hash[:12]}-seed{config.seed}"


def to_jsonable(value):
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def csv_value(value):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ''
    return value


class RunWriter:
    """Writes the files of one run; every file carries the config hash"""

    def __init__(self, config, output_dir=None):
        self.config = config
        self.config_hash = config.hash
        self.output_dir = Path(output_dir) if output_dir else default_output_dir(config)

    def prepare(self):
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir

    def write_csv(self, rows, name=RESULTS_FILE):
        """RFC-4180 CSV with a header row; columns in first-seen order"""
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)
        columns.append('config_hash')
        path = self.output_dir / name
        with path.open('w', encoding='utf-8', newline='') as handle:
            writer = csv.DictWriter(handle, fieldnames=columns, lineterminator='\r\n')
            writer.writeheader()
            for row in rows:
                record = {key: csv_value(value) for key, value in row.items()}
                record['config_hash'] = self.config_hash
                writer.writerow(record)
        return path

    def write_result(self, outcome, timings):
        document = {
            'experiment': self.config.kind,
            'config_hash': self.config_hash,
            'seed': self.config.seed,
            'verdicts': {verdict.name: verdict.as_dict() for verdict in outcome.verdicts},
            'summary': outcome.summary,
            'timings': timings,
        }
        path = self.output_dir / RESULT_JSON
        path.write_text(json.dumps(to_jsonable(document), indent=2, sort_keys=True) + '\n', encoding='utf-8')
        return path

    def write_resolved_config(self):
        path = self.output_dir / RESOLVED_CONFIG
        path.write_text(self.config.dumps(), encoding='utf-8')
        return path

    def write_outcome(self, outcome, timings):
        self.write_csv(outcome.rows)
        for name, rows in outcome.tables.items():
            self.write_csv(rows, name)
        self.write_resolved_config()
        return self.write_result(outcome, timings)

    @contextmanager
    def capture_log(self):
        """Attach a run.log handler to every app logger for the duration"""
        handler = logging.FileHandler(self.output_dir / RUN_LOG, mode='w', encoding='utf-8')
        handler.setFormatter(logging.Formatter('{asctime} {levelname} {name}: {message}', style='{'))
        handler.setLevel(logging.DEBUG)
        loggers = [logging.getLogger(name) for name in settings.INSTALLED_APPS]
        for logger in loggers:
            logger.addHandler(handler)
        try:
            yield handler
        finally:
            for logger in loggers:
                logger.removeHandler(handler)
            handler.close()
