"""
Minimum-action search with beta-continuation.

The optimizer works in the scaled variables x = sqrt(dt) v, in which the
action is 1/2 |x|^2 and the Euclidean gradient norm equals the
L^2(0, T; l^2) norm of the control gradient.
"""
import logging

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from fwlab.exceptions import BlowUpError
from property_lab.oracles import discrete_optimal_control
from skeleton.control import Control
from spectral.norms import inner_values, l2_norm_sq_values
from .adjoint import action, evaluate
from .problem import RateResult

logger = logging.getLogger(__name__)


class ScaledObjective:
    """J and dJ/dx as functions of the flat scaled vector x"""

    def __init__(self, problem):
        self.problem = problem
        self.dt = problem.dynamics.dt
        self.shape = (problem.dynamics.steps, problem.dynamics.K)
        self.root = np.sqrt(self.dt)
        self.evaluations = 0
        self.last = None

    def control(self, x):
        return Control(self.dt, np.reshape(x, self.shape) / self.root)

    def scale(self, control):
        return (control.values * self.root).ravel()

    def __call__(self, x):
        self.evaluations += 1
        try:
            result = evaluate(self.problem, self.control(x))
        except BlowUpError as error:
            logger.debug("objective blew up at step %d during line search", error.step)
            return np.inf, np.zeros_like(x)
        self.last = result
        return result.objective, (result.gradient.values / self.root).ravel()


def run_lbfgs(objective, x0, settings):
    history = []

    def record(intermediate_result):
        history.append(float(intermediate_result.fun))

    outcome = scipy_minimize(
        objective, x0, jac=True, method='L-BFGS-B', callback=record,
        options={
            'maxiter': settings.max_iterations,
            'gtol': settings.gradient_tolerance / np.sqrt(x0.size),
            'ftol': settings.function_tolerance,
        },
    )
    return outcome.x, int(outcome.nit), history, str(outcome.message)


def run_armijo(objective, x0, settings):
    """Steepest descent with Armijo backtracking"""
    x = x0
    value, gradient = objective(x)
    history = [value]
    step = settings.initial_step
    iterations = 0
    message = 'iteration limit reached'
    while iterations < settings.max_iterations:
        norm_sq = float(gradient @ gradient)
        if np.sqrt(norm_sq) <= settings.gradient_tolerance:
            message = 'gradient tolerance reached'
            break
        for _ in range(settings.max_backtracks):
            trial = x - step * gradient
            trial_value, trial_gradient = objective(trial)
            if trial_value <= value - settings.armijo_constant * step * norm_sq:
                break
            step *= settings.backtrack
        else:
            message = 'line search failed'
            break
        x, value, gradient = trial, trial_value, trial_gradient
        history.append(value)
        iterations += 1
        step = min(step / settings.backtrack, settings.initial_step)
    return x, iterations, history, message


def residual_of(problem, trajectory):
    """Constraint residual and, in path mode, the sup-in-time distance"""
    grid = problem.dynamics.grid
    terminal = trajectory.states[-1]
    if problem.mode == 'endpoint':
        return float(np.sqrt(l2_norm_sq_values(terminal - problem.target.values, grid))), None
    if problem.mode == 'observable':
        return abs(float(inner_values(terminal, problem.observable.values, grid)) - problem.target), None
    difference = trajectory.states - problem.target.states
    dt = problem.dynamics.dt
    residual = float(np.sqrt(dt * np.sum(l2_norm_sq_values(difference[1:], grid))))
    return residual, float(np.sqrt(np.max(l2_norm_sq_values(difference, grid))))


def target_scale(problem):
    if problem.mode == 'observable':
        return abs(problem.target)
    if problem.mode == 'endpoint':
        return float(np.sqrt(l2_norm_sq_values(problem.target.values, problem.dynamics.grid)))
    return float(np.sqrt(np.max(l2_norm_sq_values(problem.target.states, problem.dynamics.grid))))


def minimize_once(problem, control_init):
    """One continuation run from a single starting control"""
    settings = problem.settings
    runner = run_lbfgs if settings.method == 'lbfgs' else run_armijo
    x = None
    iterations = 0
    history = []
    stages = []
    for factor in settings.continuation:
        stage_problem = problem.with_beta(problem.beta * factor)
        objective = ScaledObjective(stage_problem)
        x = objective.scale(control_init) if x is None else x
        x, stage_iterations, stage_history, message = runner(objective, x, settings)
        iterations += stage_iterations
        history.append(stage_history)
        final = evaluate(stage_problem, objective.control(x))
        stages.append({
            'beta': stage_problem.beta,
            'iterations': stage_iterations,
            'objective': final.objective,
            'gradient_norm': final.gradient_norm,
            'message': message,
        })
        logger.info(
            "beta=%.4g: J=%.6g |grad|=%.3e after %d iterations (%s)",
            stage_problem.beta, final.objective, final.gradient_norm, stage_iterations, message,
        )

    control = objective.control(x)
    residual, sup_distance = residual_of(problem, final.trajectory)
    tolerance = settings.residual_tolerance * max(1.0, target_scale(problem))
    converged = final.gradient_norm <= settings.gradient_tolerance and residual <= tolerance
    if not converged:
        logger.warning(
            "rate optimization not converged: |grad|=%.3e, residual=%.3e (tolerance %.3e)",
            final.gradient_norm, residual, tolerance,
        )
    return RateResult(
        control=control,
        action=action(control),
        residual=residual,
        iterations=iterations,
        converged=converged,
        objective=final.objective,
        beta=problem.beta * settings.continuation[-1],
        gradient_norm=final.gradient_norm,
        trajectory=final.trajectory,
        sup_distance=sup_distance,
        history=history,
        stages=stages,
        message=stages[-1]['message'],
    )


def starting_controls(problem, control_init):
    settings = problem.settings
    rng = np.random.Generator(np.random.Philox(key=settings.seed))
    starts = [control_init]
    for _ in range(settings.multistart - 1):
        noise = settings.perturbation * rng.standard_normal(control_init.values.shape)
        starts.append(Control(control_init.dt, control_init.values + noise))
    return starts


def minimize(problem, control_init=None):
    """
    Best RateResult over the configured starts; converged results win over
    non-converged ones, then the lower final objective.
    """
    if problem.beta <= 0:
        raise ValueError(f"minimization needs a positive penalty, got beta={problem.beta}")
    control_init = control_init or problem.zero_control()
    results = [minimize_once(problem, start) for start in starting_controls(problem, control_init)]
    best = min(results, key=lambda result: (not result.converged, result.objective))
    if len(results) > 1:
        logger.info("multistart: best of %d starts has action %.6g", len(results), best.action)
    return best


def linear_mode_warm_start(dynamics, x, mu, b, mode=0):
    """
    Analytic minimum-energy control of the single-mode linear problem, on
    the given noise mode; c is read off the mode's L^2 norm.
    """
    c = float(np.sqrt(dynamics.noise.additive_norms_sq()[mode]))
    values = np.zeros((dynamics.steps, dynamics.K))
    values[:, mode] = discrete_optimal_control(c, mu, b, dynamics.dt, dynamics.steps, x)
    return Control(dynamics.dt, values)
