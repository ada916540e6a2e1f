"""
Experiment configs: TOML documents with the sections [grid], [drift],
[noise], [solver] and [experiment].

Loading validates every section, fills in defaults and computes the config
hash over the resolved values, so a resolved config written by one run
reloads to the same hash.
"""
import copy
import hashlib
import json
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path

import tomli_w

from fwlab.exceptions import ConfigError
from .forms import EXPERIMENT_FORMS, SECTION_FORMS

SECTIONS = ('grid', 'drift', 'noise', 'solver', 'experiment')

_HEADER = re.compile(r'^\s*\[\s*([A-Za-z0-9_]+)\s*\]')
_KEY = re.compile(r'^\s*([A-Za-z0-9_]+)\s*=')
_DECODE_LINE = re.compile(r'line (\d+)')


def locate(text, section, key=None):
    """1-based line of a section header or of a key inside it, None when absent"""
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _HEADER.match(line)
        if header:
            current = header.group(1)
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section:
            match = _KEY.match(line)
            if match and match.group(1) == key:
                return number
    return None


@dataclass(frozen=True)
class ExperimentConfig:
    sections: dict
    path: str = ''
    text: str = field(default='', repr=False, compare=False)

    @property
    def grid(self):
        return self.sections['grid']

    @property
    def drift(self):
        return self.sections['drift']

    @property
    def noise(self):
        return self.sections['noise']

    @property
    def solver(self):
        return self.sections['solver']

    @property
    def experiment(self):
        return self.sections['experiment']

    @property
    def kind(self):
        return self.experiment['kind']

    @property
    def seed(self):
        return self.experiment['seed']

    def resolved(self):
        """Section values without unset optional keys, ready for TOML"""
        return {
            name: {key: value for key, value in values.items() if value is not None}
            for name, values in self.sections.items()
        }

    @property
    def hash(self):
        canonical = json.dumps(self.resolved(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def with_seed(self, seed):
        sections = copy.deepcopy(self.sections)
        sections['experiment']['seed'] = seed
        return ExperimentConfig(sections, self.path, self.text)

    def dumps(self):
        """Resolved config as TOML, headed by its hash"""
        return f"# config_hash = {self.hash}\n" + tomli_w.dumps(self.resolved())


def validate_section(form_class, name, values, path, text):
    if not isinstance(values, dict):
        raise ConfigError(f"[{name}] must be a table", path, locate(text, name), name)
    unknown = sorted(set(values) - set(form_class.base_fields))
    if unknown:
        key = unknown[0]
        raise ConfigError(f"unknown key {key!r} in [{name}]", path, locate(text, name, key), key)
    form = form_class.from_section(values)
    if not form.is_valid():
        key, errors = next(iter(form.errors.items()))
        if key == '__all__':
            raise ConfigError(f"[{name}]: {errors[0]}", path, locate(text, name), name)
        raise ConfigError(f"[{name}] {key}: {errors[0]}", path, locate(text, name, key), key)
    return dict(form.cleaned_data)


def parse_config(text, path=''):
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        match = _DECODE_LINE.search(str(error))
        raise ConfigError(f"invalid TOML: {error}", path, int(match.group(1)) if match else None)
    unknown = sorted(set(document) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown section [{unknown[0]}]", path, locate(text, unknown[0]), unknown[0])
    experiment = document.get('experiment')
    if not isinstance(experiment, dict) or 'kind' not in experiment:
        raise ConfigError("[experiment] must declare a kind", path, locate(text, 'experiment'), 'kind')
    form_class = EXPERIMENT_FORMS.get(experiment['kind'])
    if form_class is None:
        raise ConfigError(
            f"unknown experiment kind {experiment['kind']!r}", path, locate(text, 'experiment', 'kind'), 'kind',
        )
    if 'grid' not in document:
        raise ConfigError("missing [grid] section", path, None, 'grid')
    sections = {}
    for name, section_form in SECTION_FORMS.items():
        sections[name] = validate_section(section_form, name, document.get(name, {}), path, text)
    sections['experiment'] = validate_section(form_class, 'experiment', experiment, path, text)
    return ExperimentConfig(sections, str(path), text)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as error:
        raise ConfigError(f"cannot read config: {error.strerror}", str(path))
    return parse_config(text, str(path))
