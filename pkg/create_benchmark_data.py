#!/usr/bin/env python
"""
Evaluate the closed-form oracles of the single-mode linear benchmark and
check the expected values recorded in the bundled configs.
"""
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import django

# Setup Django
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'fwlab.settings')
django.setup()

from property_lab.oracles import (  # noqa: E402
    discrete_gramian, gaussian_tail, gramian, minimal_action,
)

BENCHMARKS = Path(__file__).resolve().parent / 'benchmarks'

# F = u/2 on the mode cos(x)/sqrt(pi): mu = 1, b = 1/2, a = 3/2, c = 1
C, MU, B = 1.0, 1.0, 0.5
DECAY = MU + B
HORIZON = 1.0
THRESHOLD = 1.0


def benchmark_values():
    continuous = gramian(C, DECAY, HORIZON)
    values = {
        'gramian': continuous,
        'minimal_action': minimal_action(THRESHOLD, continuous),
        'discrete': {},
    }
    for dt in (0.01, 0.0025):
        steps = round(HORIZON / dt)
        W = discrete_gramian(C, MU, B, dt, steps)
        values['discrete'][str(dt)] = {
            'steps': steps,
            'gramian': W,
            'minimal_action': minimal_action(THRESHOLD, W),
            'tail_probability': {
                str(epsilon): gaussian_tail(THRESHOLD, epsilon * W)
                for epsilon in (1.0, 0.2, 0.1, 0.05, 0.02)
            },
        }
    return values


def check_expected(values):
    config = tomllib.loads((BENCHMARKS / 'lq_rate.toml').read_text(encoding='utf-8'))
    recorded = config['experiment']['expected_action']
    error = abs(recorded - values['minimal_action']) / values['minimal_action']
    if error > 1e-6:
        print(f"✗ lq_rate.toml records {recorded}, the Gramian gives {values['minimal_action']:.6f}")
        return False
    print(f"✓ lq_rate.toml expected_action {recorded} matches the Gramian")
    return True


def create_benchmark_data():
    print("Evaluating linear-mode oracles...")
    values = benchmark_values()
    print(f"  W(T) = {values['gramian']:.8f}")
    print(f"  minimal action x^2 / (2 W) = {values['minimal_action']:.6f}")
    for dt, discrete in values['discrete'].items():
        print(f"  dt={dt}: W_d = {discrete['gramian']:.8f}, action {discrete['minimal_action']:.6f}")
        for epsilon, probability in discrete['tail_probability'].items():
            print(f"    eps={epsilon}: P((u(T), e_1) >= 1) = {probability:.6e}")
    return check_expected(values)


if __name__ == '__main__':
    sys.exit(0 if create_benchmark_data() else 1)
