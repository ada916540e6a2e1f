"""
Action functional and its exact discrete adjoint gradient.

With w^m = u^m + dt (g - f(u^m)) + sigma(t_m, u^m) (dt v_m) and
u^{m+1} = S w^m, the adjoint runs backward as

    q^m = S p^{m+1}
    p^m = q^m - dt f'(u^m) q^m + [d/du sigma(u^m) (dt v_m)] q^m + source^m
    dJ/dv_m = dt (v_m + sigma(t_m, u^m)^* q^m)

starting from p^M = dPhi/du^M. S is symmetric, so its transpose is itself.
"""
from dataclasses import dataclass

import numpy as np

from noise.operators import adjoint_sigma_values, sigma_linearization_values
from skeleton.control import Control
from skeleton.solver import integrate_skeleton
from skeleton.trajectory import Trajectory
from spectral.norms import inner_values, l2_norm_sq_values


def action(control):
    """1/2 sum dt |v_m|^2"""
    return 0.5 * control.energy


@dataclass(frozen=True, eq=False)
class Evaluation:
    objective: float
    gradient: Control
    trajectory: Trajectory
    misfit: float

    @property
    def gradient_norm(self):
        """Norm of the gradient as an element of L^2(0, T; l^2)"""
        return float(np.sqrt(np.sum(self.gradient.values ** 2) / self.gradient.dt))


def misfit_and_terminal(problem, states):
    """Misfit value and the adjoint terminal condition dPhi/du^M / beta"""
    grid = problem.dynamics.grid
    dt = problem.dynamics.dt
    terminal = states[-1]
    if problem.mode == 'endpoint':
        difference = terminal - problem.target.values
        return float(l2_norm_sq_values(difference, grid)), difference
    if problem.mode == 'observable':
        e = problem.observable.values
        gap = float(inner_values(terminal, e, grid)) - problem.target
        return gap ** 2, gap * e
    difference = states - problem.target.states
    weights = problem.path_weights
    misfit = float(dt * np.sum(weights[1:] * l2_norm_sq_values(difference[1:], grid)))
    return misfit, dt * weights[-1] * difference[-1]


def path_source(problem, states, m):
    difference = states[m] - problem.target.states[m]
    return problem.dynamics.dt * problem.path_weights[m] * difference


def evaluate(problem, control):
    """Objective, adjoint gradient and forward trajectory at control"""
    dynamics = problem.dynamics
    trajectory = integrate_skeleton(problem.u0, control, dynamics)
    states = trajectory.states
    misfit, terminal = misfit_and_terminal(problem, states)
    objective = action(control) + 0.5 * problem.beta * misfit

    dt = dynamics.dt
    gradient = dt * control.values.copy()
    p = problem.beta * terminal
    for m in range(dynamics.steps - 1, -1, -1):
        t = m * dt
        u = states[m]
        q = dynamics.semigroup_step(p)
        gradient[m] += dt * adjoint_sigma_values(dynamics.noise, t, u, q)
        if m == 0:
            break
        linear = -dt * dynamics.drift_slope_values(t, u) \
            + sigma_linearization_values(dynamics.noise, t, u, dt * control.values[m])
        p = q + linear * q
        if problem.mode == 'path':
            p = p + problem.beta * path_source(problem, states, m)
    return Evaluation(objective, Control(dt, gradient), trajectory, misfit)


def objective_and_gradient(problem, control):
    result = evaluate(problem, control)
    return result.objective, result.gradient


def objective(problem, control):
    trajectory = integrate_skeleton(problem.u0, control, problem.dynamics)
    misfit, _ = misfit_and_terminal(problem, trajectory.states)
    return action(control) + 0.5 * problem.beta * misfit


def gradient_check(problem, control, directions=20, seed=0, step=1e-5):
    """
    Worst relative error between the adjoint directional derivative and
    central differences of J along random directions.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    gradient = evaluate(problem, control).gradient.values
    scale = step * max(1.0, float(np.linalg.norm(control.values)))
    worst = 0.0
    for _ in range(directions):
        direction = rng.standard_normal(control.values.shape)
        direction /= np.linalg.norm(direction)
        delta = Control(control.dt, scale * direction)
        difference = (objective(problem, control + delta) - objective(problem, control - delta)) / (2.0 * scale)
        adjoint = float(np.sum(gradient * direction))
        error = abs(difference - adjoint) / max(abs(difference), abs(adjoint), 1e-300)
        worst = max(worst, error)
    return worst
