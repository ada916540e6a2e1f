"""
Empirical checks of the analytic properties of the controlled equation:
uniform tail decay over energy balls, weak-to-strong continuity of the
solution map, its Lipschitz bound, and moment bounds uniform in epsilon.

Every experiment returns a LabResult holding the full table, a summary
and PASS/FAIL verdicts against the thresholds it was given.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from fwlab.exceptions import BlowUpError
from skeleton.control import Control
from skeleton.solver import integrate_skeleton
from spde.solver import simulate_shifted
from spde.stream import NoiseStream
from spectral.grid import Field
from spectral.norms import check_tail_radius, l2_norm

logger = logging.getLogger(__name__)

BALL_SAMPLING = 'gaussian direction, energy R^2 U^(2/(M K))'


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    value: float
    threshold: float

    def as_dict(self):
        return {'name': self.name, 'passed': self.passed, 'value': self.value, 'threshold': self.threshold}


@dataclass(frozen=True)
class LabResult:
    kind: str
    rows: list
    summary: dict
    verdicts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(verdict.passed for verdict in self.verdicts)

    def verdicts_dict(self):
        return {verdict.name: verdict.as_dict() for verdict in self.verdicts}


def map_ordered(function, items, threads=None):
    """Apply function over items on a thread pool, results in item order"""
    threads = max(1, threads or settings.FWLAB_THREADS)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, items))


def random_energy_ball_controls(radius, count, steps, modes, dt, seed):
    """
    Controls with energy int |v|^2 <= R^2: a Gaussian direction per
    control, rescaled to energy R^2 U^{2/(M K)} with U uniform.

    Control i only depends on (seed, i).
    """
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    exponent = 2.0 / (steps * modes)
    controls = []
    for index in range(count):
        rng = np.random.Generator(np.random.Philox(key=[seed, index]))
        direction = rng.standard_normal((steps, modes))
        level = radius ** 2 * rng.uniform() ** exponent
        energy = dt * np.sum(direction ** 2)
        controls.append(Control(dt, direction * np.sqrt(level / energy)))
    return controls


def check_increasing(values, what):
    if len(values) == 0:
        raise ValueError(f"{what} must not be empty")
    if any(later <= earlier for earlier, later in zip(values, values[1:])):
        raise ValueError(f"{what} must be strictly increasing, got {list(values)}")


def tail_experiment(dynamics, u0, radius, m_list, n_controls, seed, tail_tolerance=1e-6, threads=None):
    """Worst sup_t int_{|x| >= m} |u_v|^2 over random controls in the R-ball"""
    check_increasing(m_list, 'tail radii')
    for m in m_list:
        check_tail_radius(dynamics.grid, m)
    controls = random_energy_ball_controls(radius, n_controls, dynamics.steps, dynamics.K, dynamics.dt, seed)

    def tails(control):
        try:
            path = integrate_skeleton(u0, control, dynamics)
        except BlowUpError:
            return None
        return [path.sup_tail_mass(m) for m in m_list]

    results = map_ordered(tails, controls, threads)
    finished = [row for row in results if row is not None]
    blow_ups = len(results) - len(finished)
    if blow_ups:
        logger.warning("%d of %d skeleton runs blew up and are excluded", blow_ups, n_controls)
    worst = np.max(finished, axis=0) if finished else np.full(len(m_list), np.nan)
    rows = [{'m': float(m), 'worst_tail_mass': float(w)} for m, w in zip(m_list, worst)]
    monotone = bool(np.all(np.diff(worst) <= 0))
    verdicts = [
        Verdict('tail_monotone', monotone, float(np.max(np.diff(worst), initial=0.0)), 0.0),
        Verdict('tail_small', bool(worst[-1] <= tail_tolerance), float(worst[-1]), tail_tolerance),
    ]
    summary = {
        'radius': radius,
        'controls': n_controls,
        'blow_ups': blow_ups,
        'control_sampling': BALL_SAMPLING,
    }
    return LabResult('tails', rows, summary, verdicts)


def oscillating_controls(base, mode, amplitude, n_list):
    """v_n = v + A sin(2 pi n t / T) e_k sampled at the left step points"""
    if not 0 <= mode < base.modes:
        raise ValueError(f"mode {mode} outside the {base.modes} control modes")
    times = base.dt * np.arange(base.steps)
    for n in n_list:
        values = base.values.copy()
        values[:, mode] += amplitude * np.sin(2.0 * np.pi * n * times / base.horizon)
        yield n, Control(base.dt, values)


def weak_convergence_experiment(dynamics, u0, base, mode, amplitude, n_list, p=None, threads=None):
    """
    Distances between u_{v_n} and u_v for weakly null perturbations of
    constant energy. Rows carry n times the sup distance, which settles to
    a constant for linear dynamics.
    """
    check_increasing(n_list, 'oscillation counts')
    if 2 * max(n_list) >= base.steps:
        raise ValueError(f"n={max(n_list)} is not resolved by {base.steps} steps")
    p = p or dynamics.drift.p
    reference = integrate_skeleton(u0, base, dynamics)
    perturbed = list(oscillating_controls(base, mode, amplitude, n_list))

    def row(item):
        n, control = item
        distance = integrate_skeleton(u0, control, dynamics).distance(reference, p)
        return {
            'n': n,
            'sup_l2': distance['sup_l2'],
            'v_integral': distance['v_integral'],
            'lp': distance['lp'],
            'control_distance': (control - base).l2_norm(),
            'n_sup_l2': n * distance['sup_l2'],
        }

    rows = map_ordered(row, perturbed, threads)
    sup = np.array([r['sup_l2'] for r in rows])
    v_int = np.array([r['v_integral'] for r in rows])
    gaps = np.array([r['control_distance'] for r in rows])
    spread = float(gaps.max() / gaps.min() - 1.0) if gaps.min() > 0 else 0.0
    verdicts = [
        Verdict('sup_l2_decreasing', bool(np.all(np.diff(sup) <= 0)), float(np.max(np.diff(sup), initial=0.0)), 0.0),
        Verdict('v_integral_decreasing', bool(np.all(np.diff(v_int) <= 0)), float(np.max(np.diff(v_int), initial=0.0)), 0.0),
        Verdict('control_distance_constant', spread <= 1e-6, spread, 1e-6),
    ]
    summary = {'mode': mode, 'amplitude': amplitude, 'p': p, 'base_energy': base.energy}
    return LabResult('weak_convergence', rows, summary, verdicts)


def moment_functional(trajectory):
    """sup_t ||u||^2 + int ||u||_V^2 + int ||u||_{L^p}^p"""
    return trajectory.sup_l2_sq() + trajectory.v_integral() + trajectory.lp_integral()


def moment_bound_experiment(dynamics, u0, radius, samples, epsilons, seed, ratio_threshold=2.0, threads=None):
    """
    Monte Carlo mean of the moment functional of the shifted SPDE with
    controls drawn from the R-ball, one mean per epsilon. Sample i uses
    control i and NoiseStream(seed, i) at every epsilon.
    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    if not epsilons or min(epsilons) < 0:
        raise ValueError("epsilons must be a nonempty list of nonnegative values")
    controls = random_energy_ball_controls(radius, samples, dynamics.steps, dynamics.K, dynamics.dt, seed)
    rows = []
    for epsilon in epsilons:
        def sample(index):
            try:
                if epsilon == 0:
                    path = integrate_skeleton(u0, controls[index], dynamics)
                else:
                    path = simulate_shifted(u0, epsilon, controls[index], dynamics, NoiseStream(seed, index))
            except BlowUpError:
                return None
            return moment_functional(path)

        values = map_ordered(sample, range(samples), threads)
        finite = np.array([value for value in values if value is not None])
        blow_ups = samples - finite.size
        if blow_ups:
            logger.warning("epsilon=%g: %d of %d runs blew up and are excluded", epsilon, blow_ups, samples)
        mean = float(np.mean(finite)) if finite.size else float('nan')
        std_error = float(np.std(finite) / np.sqrt(finite.size)) if finite.size else float('nan')
        rows.append({
            'epsilon': epsilon,
            'mean': mean,
            'std_error': std_error,
            'max': float(np.max(finite)) if finite.size else float('nan'),
            'blow_ups': blow_ups,
        })
    means = np.array([row['mean'] for row in rows])
    if not np.all(np.isfinite(means)):
        # an epsilon without a finite sample bounds nothing
        ratio = float('inf')
    elif means.min() > 0:
        ratio = float(means.max() / means.min())
    else:
        ratio = float('inf') if means.max() > 0 else 1.0
    summary = {'radius': radius, 'samples': samples, 'ratio': ratio, 'control_sampling': BALL_SAMPLING}
    verdicts = [Verdict('uniform_in_epsilon', ratio < ratio_threshold, ratio, ratio_threshold)]
    return LabResult('moments', rows, summary, verdicts)


def perturbation_directions(dynamics, seed):
    """Unit white-noise field and unit-norm control, both seeded"""
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    field_values = rng.standard_normal(dynamics.grid.shape)
    direction = Field(dynamics.grid, field_values)
    direction = direction * (1.0 / l2_norm(direction))
    control_values = rng.standard_normal((dynamics.steps, dynamics.K))
    control = Control(dynamics.dt, control_values)
    return direction, control * (1.0 / control.l2_norm())


def solution_map_experiment(dynamics, u0, base, deltas, seed, spread_threshold=2.0):
    """
    Ratios (sup_t ||du||^2 + int ||du||_V^2) / delta^2 for perturbations of
    size delta in the initial data and in the control. A bounded spread of
    the ratios over delta is the Lipschitz signature.
    """
    check_increasing(sorted(deltas), 'deltas')
    direction, control_direction = perturbation_directions(dynamics, seed)
    reference = integrate_skeleton(u0, base, dynamics)
    rows = []
    for slot in ('initial', 'control'):
        for delta in deltas:
            if slot == 'initial':
                path = integrate_skeleton(u0 + direction * delta, base, dynamics)
            else:
                path = integrate_skeleton(u0, base + control_direction * delta, dynamics)
            distance = path.distance(reference)
            combined = distance['sup_l2'] ** 2 + distance['v_integral']
            rows.append({
                'slot': slot,
                'delta': delta,
                'sup_l2_sq': distance['sup_l2'] ** 2,
                'v_integral': distance['v_integral'],
                'ratio': combined / delta ** 2,
            })
    verdicts = []
    summary = {'deltas': list(deltas)}
    for slot in ('initial', 'control'):
        ratios = np.array([row['ratio'] for row in rows if row['slot'] == slot])
        spread = float(ratios.max() / ratios.min()) if ratios.min() > 0 else float('inf')
        summary[f'{slot}_spread'] = spread
        summary[f'{slot}_max_ratio'] = float(ratios.max())
        verdicts.append(Verdict(f'{slot}_lipschitz', spread < spread_threshold, spread, spread_threshold))
    return LabResult('solution_map', rows, summary, verdicts)
