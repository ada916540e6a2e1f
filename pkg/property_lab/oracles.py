"""
Closed forms for the single-mode linear problem

    dX = (-a X + c v) dt + sqrt(eps) c dW,    a = mu + b,

where mu = |xi|^{2 alpha} is the Fourier symbol of the mode and F = b u.
The discrete forms follow the exponential Euler recursion exactly:

    X^{m+1} = exp(-mu dt) ((1 - b dt) X^m + c w^m).
"""
import numpy as np
from scipy.stats import norm


def gramian(c, decay, horizon):
    """W(T) = c^2 (1 - exp(-2aT)) / (2a)"""
    if decay == 0:
        return c ** 2 * horizon
    return c ** 2 * -np.expm1(-2.0 * decay * horizon) / (2.0 * decay)


def contraction_factor(mu, b, dt):
    return np.exp(-mu * dt) * (1.0 - b * dt)


def discrete_gramian(c, mu, b, dt, steps):
    rho = contraction_factor(mu, b, dt)
    powers = rho ** (2 * np.arange(steps))
    return float(c ** 2 * dt * np.exp(-2.0 * mu * dt) * np.sum(powers))


def minimal_action(x, gramian_value):
    """Least energy 1/2 int |v|^2 reaching X(T) = x from rest"""
    return x ** 2 / (2.0 * gramian_value)


def optimal_control(t, c, decay, horizon, x):
    """v*(t) = c exp(-a (T - t)) x / W(T)"""
    return c * np.exp(-decay * (horizon - np.asarray(t, dtype=float))) * x / gramian(c, decay, horizon)


def discrete_optimal_control(c, mu, b, dt, steps, x):
    """Minimum-energy piecewise-constant control of the discrete recursion"""
    rho = contraction_factor(mu, b, dt)
    shape = c * np.exp(-mu * dt) * rho ** (steps - 1 - np.arange(steps))
    return x * shape / discrete_gramian(c, mu, b, dt, steps)


def discrete_ou_variance(epsilon, c, mu, b, dt, steps):
    return epsilon * discrete_gramian(c, mu, b, dt, steps)


def gaussian_tail(x, variance):
    """P(X >= x) for X ~ N(0, variance)"""
    return float(norm.sf(x / np.sqrt(variance)))


def oscillatory_response(t, c, amplitude, decay, omega):
    """X(t) for X' = -a X + c A sin(omega t), X(0) = 0"""
    t = np.asarray(t, dtype=float)
    numerator = decay * np.sin(omega * t) - omega * np.cos(omega * t) + omega * np.exp(-decay * t)
    return c * amplitude * numerator / (decay ** 2 + omega ** 2)
