"""Domain objects built from a validated ExperimentConfig."""
import numpy as np

from drift.conditions import SampleSpec
from drift.spec import DriftSpec
from fwlab.exceptions import ConfigError
from noise.spec import SineEnvelope, build_noise
from rare_events.events import EventSpec
from rate.optimizer import linear_mode_warm_start
from rate.problem import OptimizerSettings, RateProblem
from skeleton.control import Control
from skeleton.dynamics import Dynamics
from skeleton.solver import integrate_skeleton
from spectral.grid import Field, Grid
from .forms import DRIFT_CONSTANTS

TAMING = {'auto': None, 'on': True, 'off': False}


def build_grid(config):
    grid = config.grid
    return Grid(grid['dim'], grid['half_width'], grid['points'])


def build_drift(config):
    drift = config.drift
    overrides = {name: drift[name] for name in DRIFT_CONSTANTS if drift.get(name) is not None}
    return DriftSpec.canonical(drift['p'], drift['a'], drift['b'], **overrides)


def build_noise_spec(config, grid):
    noise = config.noise
    envelope = None
    if noise['envelope_amplitude']:
        envelope = SineEnvelope(noise['envelope_amplitude'], noise['envelope_frequency'])
    return build_noise(
        grid, noise['K'],
        profile=noise['profile'],
        amplitude=noise['amplitude'],
        decay=noise['decay'],
        width=noise['width'],
        kappa_shape=noise['kappa_shape'],
        kappa_amplitude=noise['kappa_amplitude'],
        kappa_width=noise['kappa_width'],
        sigma2=noise['sigma2'],
        coupling=noise['coupling'],
        envelope=envelope,
    )


def gaussian_bump(grid, amplitude, width):
    return Field(grid, amplitude * np.exp(-grid.radius ** 2 / width ** 2))


def build_forcing(config, grid):
    solver = config.solver
    if not solver['forcing_amplitude']:
        return None
    return gaussian_bump(grid, solver['forcing_amplitude'], solver['forcing_width'])


def build_dynamics(config):
    grid = build_grid(config)
    return Dynamics(
        grid=grid,
        drift=build_drift(config),
        noise=build_noise_spec(config, grid),
        alpha=config.solver['alpha'],
        dt=config.solver['dt'],
        steps=config.solver['steps'],
        forcing=build_forcing(config, grid),
        taming=TAMING[config.drift['taming']],
    )


def build_initial(config, dynamics):
    solver = config.solver
    if solver['initial'] == 'zero':
        return Field.zeros(dynamics.grid)
    if solver['initial'] == 'mode':
        return dynamics.noise.unit_mode(0) * solver['initial_amplitude']
    return gaussian_bump(dynamics.grid, solver['initial_amplitude'], solver['initial_width'])


def check_mode(config, dynamics, key):
    mode = config.experiment[key]
    if mode >= dynamics.K:
        raise ConfigError(f"{key}={mode} but the noise has {dynamics.K} modes", config.path, None, key)
    return mode


def build_control(config, dynamics):
    """Zero or constant control from the control / control_amplitude keys"""
    experiment = config.experiment
    if experiment['control'] == 'zero':
        return Control.zeros(dynamics.steps, dynamics.K, dynamics.dt)
    values = np.full((dynamics.steps, dynamics.K), experiment['control_amplitude'])
    return Control(dynamics.dt, values)


def build_optimizer_settings(config):
    experiment = config.experiment
    return OptimizerSettings(
        method=experiment['method'],
        max_iterations=experiment['max_iterations'],
        gradient_tolerance=experiment['gradient_tolerance'],
        residual_tolerance=experiment['residual_tolerance'],
        continuation=tuple(experiment['continuation']),
        multistart=experiment['multistart'],
        perturbation=experiment['perturbation'],
        seed=experiment['seed'],
    )


def linear_mode_constants(config, dynamics, mode):
    """
    (mu, b) of a Fourier mode under a linear drift, the inputs of the
    analytic warm start
    """
    if config.drift['p'] != 2 or config.noise['profile'] != 'fourier' or dynamics.noise.multiplicative:
        raise ConfigError(
            "the analytic warm start needs p = 2, additive noise and Fourier modes",
            config.path, None, 'warm_start',
        )
    if dynamics.grid.dim != 1:
        raise ConfigError("the analytic warm start needs a one-dimensional grid", config.path, None, 'warm_start')
    wavenumber = np.pi * ((mode + 2) // 2) / dynamics.grid.half_width
    mu = wavenumber ** (2.0 * dynamics.alpha)
    return mu, config.drift['a'] - config.drift['b']


def build_warm_start(config, dynamics, x, mode):
    mu, b = linear_mode_constants(config, dynamics, mode)
    return linear_mode_warm_start(dynamics, x, mu, b, mode)


def build_rate_problem(config, dynamics, u0):
    experiment = config.experiment
    mode = check_mode(config, dynamics, 'observable_mode')
    x = experiment['target_amplitude']
    direction = dynamics.noise.unit_mode(mode)
    settings = build_optimizer_settings(config)
    target_mode = experiment['target_mode']
    if target_mode == 'endpoint':
        return RateProblem(dynamics, u0, 'endpoint', direction * x, experiment['beta'], settings=settings)
    if target_mode == 'observable':
        return RateProblem(
            dynamics, u0, 'observable', x, experiment['beta'], observable=direction, settings=settings,
        )
    # path targets follow the skeleton driven by x in the chosen mode
    values = np.zeros((dynamics.steps, dynamics.K))
    values[:, mode] = x
    target = integrate_skeleton(u0, Control(dynamics.dt, values), dynamics)
    return RateProblem(dynamics, u0, 'path', target, experiment['beta'], settings=settings)


def build_event(config, dynamics, u0):
    experiment = config.experiment
    kind = experiment['event']
    if kind == 'terminal_threshold':
        mode = check_mode(config, dynamics, 'observable_mode')
        return EventSpec(kind, threshold=experiment['threshold'], observable=dynamics.noise.unit_mode(mode))
    if kind in ('tube_exit', 'terminal_ball'):
        reference = integrate_skeleton(u0, Control.zeros(dynamics.steps, dynamics.K, dynamics.dt), dynamics)
        return EventSpec(kind, radius=experiment['radius'], reference=reference)
    return EventSpec(kind)


def build_sample_spec(config):
    experiment = config.experiment
    return SampleSpec(
        t_range=(experiment['t_min'], experiment['t_max']),
        u_range=(experiment['u_min'], experiment['u_max']),
        t_samples=experiment['t_samples'],
        u_samples=experiment['u_samples'],
        pairs=experiment['pairs'],
        seed=experiment['seed'],
    )
