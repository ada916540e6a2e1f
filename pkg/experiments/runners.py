"""
One runner per experiment kind. A runner maps a validated config to an
Outcome: the rows of results.csv, a JSON summary, verdicts, and optional
extra tables written next to results.csv.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from drift.conditions import check_conditions
from noise.conditions import check_noise_conditions
from property_lab.verifiers import (
    Verdict, moment_bound_experiment, solution_map_experiment, tail_experiment,
    weak_convergence_experiment,
)
from rare_events.estimators import MIN_ESS, estimate_is, estimate_naive
from rare_events.sweep import dominating_point, ldp_sweep
from rate.optimizer import minimize
from skeleton.control import Control
from skeleton.solver import integrate_skeleton
from spde.solver import energy_residual, simulate_shifted, simulate_spde
from spde.stream import NoiseStream
from . import builders

logger = logging.getLogger(__name__)


@dataclass
class Outcome:
    rows: list
    summary: dict
    verdicts: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(verdict.passed for verdict in self.verdicts)


def trajectory_rows(trajectory):
    records = trajectory.norm_records()
    return [
        {'t': float(t), 'l2': float(l2), 'h_alpha': float(h), 'lp': float(lp)}
        for t, l2, h, lp in zip(trajectory.times, records['l2'], records['h_alpha'], records['lp'])
    ]


def control_rows(control):
    times = control.dt * np.arange(control.steps)
    return [
        {'t': float(t), **{f'v{k}': float(value) for k, value in enumerate(row)}}
        for t, row in zip(times, control.values)
    ]


def action_verdict(config, action):
    expected = config.experiment['expected_action']
    if expected is None:
        return []
    error = abs(action - expected) / abs(expected) if expected else abs(action)
    tolerance = config.experiment['action_tolerance']
    return [Verdict('action_matches_expected', error <= tolerance, error, tolerance)]


def run_simulate(config, threads=None):
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    epsilon = config.experiment['epsilon']
    stream = NoiseStream(config.seed)
    shifted = config.experiment['control'] != 'zero' and epsilon > 0
    control = builders.build_control(config, dynamics) if shifted else None
    if shifted:
        trajectory = simulate_shifted(u0, epsilon, control, dynamics, stream)
    else:
        trajectory = simulate_spde(u0, epsilon, dynamics, stream)
    residual = energy_residual(trajectory, epsilon, dynamics, stream, control)
    summary = {
        'epsilon': epsilon,
        'steps': dynamics.steps,
        'dt': dynamics.dt,
        'tamed': dynamics.tamed,
        'sup_l2_sq': trajectory.sup_l2_sq(),
        'v_integral': trajectory.v_integral(),
        'energy_residual': residual,
        'log_weight': trajectory.log_weight,
    }
    verdicts = []
    tolerance = config.experiment['residual_tolerance']
    if tolerance is not None:
        verdicts.append(Verdict('energy_residual', residual <= tolerance, residual, tolerance))
    return Outcome(trajectory_rows(trajectory), summary, verdicts)


def run_skeleton(config, threads=None):
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    control = builders.build_control(config, dynamics)
    trajectory = integrate_skeleton(u0, control, dynamics)
    summary = {
        'action': 0.5 * control.energy,
        'sup_l2_sq': trajectory.sup_l2_sq(),
        'v_integral': trajectory.v_integral(),
        'lp_integral': trajectory.lp_integral(),
        'terminal_l2': float(trajectory.l2_norms()[-1]),
    }
    return Outcome(trajectory_rows(trajectory), summary)


def run_rate(config, threads=None):
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    problem = builders.build_rate_problem(config, dynamics, u0)
    control_init = None
    if config.experiment['warm_start']:
        control_init = builders.build_warm_start(
            config, dynamics, config.experiment['target_amplitude'], config.experiment['observable_mode'],
        )
    result = minimize(problem, control_init)
    rows = [
        {'stage': stage, 'iteration': iteration, 'objective': float(value)}
        for stage, values in enumerate(result.history)
        for iteration, value in enumerate(values)
    ]
    verdicts = [Verdict('converged', result.converged, result.gradient_norm, problem.settings.gradient_tolerance)]
    verdicts += action_verdict(config, result.action)
    summary = result.as_dict()
    summary['expected_action'] = config.experiment['expected_action']
    return Outcome(rows, summary, verdicts, {'control.csv': control_rows(result.control)})


def tilting_control(config, dynamics, u0, event):
    """Control for importance sampling from the tilt key"""
    experiment = config.experiment
    tilt = experiment['tilt']
    if tilt == 'zero':
        return Control.zeros(dynamics.steps, dynamics.K, dynamics.dt), None
    if tilt == 'warm_start':
        return builders.build_warm_start(config, dynamics, experiment['threshold'], experiment['observable_mode']), None
    settings = builders.build_optimizer_settings(config)
    rate = dominating_point(event, dynamics, u0, experiment['beta'], settings)
    return rate.control, rate


def run_mc(config, threads=None):
    experiment = config.experiment
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    event = builders.build_event(config, dynamics, u0)
    epsilon = experiment['epsilon']
    summary = {'event': event.as_dict()}
    if experiment['estimator'] == 'is':
        control, rate = tilting_control(config, dynamics, u0, event)
        if rate is not None:
            summary['rate'] = rate.as_dict()
        estimate = estimate_is(event, epsilon, control, experiment['samples'], dynamics, u0, config.seed, threads=threads)
    else:
        estimate = estimate_naive(event, epsilon, experiment['samples'], dynamics, u0, config.seed, threads=threads)
    summary.update(estimate.as_dict())
    summary['confidence_interval'] = list(estimate.confidence_interval)
    verdicts = [Verdict('effective_sample_size', not estimate.degenerate, estimate.ess, MIN_ESS)]
    expected = experiment['expected_probability']
    if expected is not None:
        error = abs(estimate.p_hat - expected)
        bound = 3.0 * estimate.std_error
        verdicts.append(Verdict('matches_expected_probability', error <= bound, error, bound))
    return Outcome([estimate.as_dict()], summary, verdicts)


def run_sweep(config, threads=None):
    experiment = config.experiment
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    event = builders.build_event(config, dynamics, u0)
    control = None
    rate_result = None
    if experiment['estimator'] == 'is':
        control, rate_result = tilting_control(config, dynamics, u0, event)
    rate = experiment['rate']
    if rate is None:
        if rate_result is None:
            settings = builders.build_optimizer_settings(config)
            rate_result = dominating_point(event, dynamics, u0, experiment['beta'], settings)
        rate = rate_result.action
    sweep = ldp_sweep(
        event, experiment['epsilons'], dynamics, u0, experiment['samples'], config.seed, rate,
        control=control, is_below=experiment['is_below'], threads=threads,
    )
    last = sweep.rows[-1]
    gap = abs(last.neg_eps_log_p - rate) / abs(rate) if rate else abs(last.neg_eps_log_p)
    tolerance = experiment['gap_tolerance']
    verdicts = [Verdict('smallest_epsilon_gap', gap <= tolerance and not last.excluded, gap, tolerance)]
    verdicts += action_verdict(config, rate)
    summary = sweep.summary()
    summary['smallest_epsilon_gap'] = gap
    summary['event'] = event.as_dict()
    if rate_result is not None:
        summary['rate_result'] = rate_result.as_dict()
    return Outcome([row.as_dict() for row in sweep.rows], summary, verdicts)


def lab_outcome(result):
    return Outcome(result.rows, result.summary, list(result.verdicts))


def run_tails(config, threads=None):
    experiment = config.experiment
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    return lab_outcome(tail_experiment(
        dynamics, u0, experiment['energy_radius'], experiment['m_list'], experiment['n_controls'],
        config.seed, experiment['tail_tolerance'], threads,
    ))


def run_weak_convergence(config, threads=None):
    experiment = config.experiment
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    base = builders.build_control(config, dynamics)
    mode = builders.check_mode(config, dynamics, 'mode')
    return lab_outcome(weak_convergence_experiment(
        dynamics, u0, base, mode, experiment['amplitude'], experiment['n_list'], threads=threads,
    ))


def run_moments(config, threads=None):
    experiment = config.experiment
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    return lab_outcome(moment_bound_experiment(
        dynamics, u0, experiment['energy_radius'], experiment['samples'], experiment['epsilons'],
        config.seed, experiment['ratio_threshold'], threads,
    ))


def run_solution_map(config, threads=None):
    experiment = config.experiment
    dynamics = builders.build_dynamics(config)
    u0 = builders.build_initial(config, dynamics)
    base = builders.build_control(config, dynamics)
    return lab_outcome(solution_map_experiment(
        dynamics, u0, base, experiment['deltas'], config.seed, experiment['spread_threshold'],
    ))


def run_check(config, threads=None):
    dynamics = builders.build_dynamics(config)
    sample_spec = builders.build_sample_spec(config)
    report = check_conditions(dynamics.drift, sample_spec)
    report.merge(check_noise_conditions(dynamics.noise, sample_spec, config.experiment['field_samples']))
    rows = [
        {'condition': name, 'margin': entry.margin, 'holds': entry.holds}
        for name, entry in report.entries.items()
    ]
    worst = min(entry.margin for entry in report.entries.values())
    verdicts = [Verdict('conditions_hold', report.all_hold, worst, 0.0)]
    summary = {'conditions': report.as_dict(), 'violations': report.violations}
    return Outcome(rows, summary, verdicts)


RUNNERS = {
    'simulate': run_simulate,
    'skeleton': run_skeleton,
    'rate': run_rate,
    'mc': run_mc,
    'sweep': run_sweep,
    'tails': run_tails,
    'weak_convergence': run_weak_convergence,
    'moments': run_moments,
    'solution_map': run_solution_map,
    'check': run_check,
}
