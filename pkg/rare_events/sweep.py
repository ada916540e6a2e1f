"""
epsilon sweeps of -eps log p_hat and the comparison with the minimal action.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from fwlab.exceptions import WeightDegeneracyError
from rate.optimizer import minimize
from rate.problem import OptimizerSettings, RateProblem
from .estimators import estimate_is, estimate_naive

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (0.2, 0.1, 0.05, 0.02)


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    p_hat: float
    neg_eps_log_p: float
    ci_lo: float
    ci_hi: float
    ess: float
    method: str
    upper_bound: bool
    excluded: bool

    def as_dict(self):
        return {
            'epsilon': self.epsilon,
            'p_hat': self.p_hat,
            'neg_eps_log_p': self.neg_eps_log_p,
            'ci_lo': self.ci_lo,
            'ci_hi': self.ci_hi,
            'ess': self.ess,
            'method': self.method,
            'upper_bound': self.upper_bound,
            'excluded': self.excluded,
        }


@dataclass(frozen=True)
class SweepResult:
    rows: list
    intercept: float
    slope: float
    rate: float
    excluded: list = field(default_factory=list)

    @property
    def gap(self):
        """Relative gap between the extrapolated limit and the minimal action"""
        if self.rate == 0:
            return abs(self.intercept)
        return abs(self.intercept - self.rate) / abs(self.rate)

    @property
    def monotone(self):
        """|(-eps log p) - rate| shrinks as eps decreases over the usable rows"""
        gaps = [abs(row.neg_eps_log_p - self.rate) for row in self.rows if not row.excluded]
        return all(later <= earlier for earlier, later in zip(gaps, gaps[1:]))

    def summary(self):
        return {
            'intercept': self.intercept,
            'slope': self.slope,
            'rate': self.rate,
            'gap': self.gap,
            'monotone': self.monotone,
            'excluded_epsilons': self.excluded,
        }


def log_interval(estimate):
    """Interval for -eps log p from the 95% interval on p_hat"""
    low, high = estimate.confidence_interval
    epsilon = estimate.epsilon
    ci_lo = -epsilon * math.log(high) if high > 0 else math.inf
    ci_hi = -epsilon * math.log(low) if low > 0 else math.inf
    return ci_lo, ci_hi


def check_epsilons(epsilons):
    if len(epsilons) < 3:
        raise ValueError(f"a sweep needs at least three epsilon values, got {len(epsilons)}")
    if any(later >= earlier for earlier, later in zip(epsilons, epsilons[1:])):
        raise ValueError("sweep epsilons must be strictly decreasing")
    if epsilons[-1] <= 0:
        raise ValueError("sweep epsilons must be positive")


def ldp_sweep(event, epsilons, dynamics, u0, samples, seed, rate, control=None, is_below=None,
              chunk_size=None, threads=None):
    """
    Estimate -eps log P(B) over a decreasing epsilon grid and extrapolate
    to eps -> 0 by a linear fit in eps.

    With a control, epsilons below ``is_below`` (all of them when it is
    None) use importance sampling tilted by it. Rows with ESS < 10 are
    excluded from the fit and listed.
    """
    check_epsilons(epsilons)
    rows = []
    excluded = []
    for epsilon in epsilons:
        use_is = control is not None and (is_below is None or epsilon < is_below)
        if use_is:
            estimate = estimate_is(event, epsilon, control, samples, dynamics, u0, seed, chunk_size, threads)
        else:
            estimate = estimate_naive(event, epsilon, samples, dynamics, u0, seed, chunk_size, threads)
        ci_lo, ci_hi = log_interval(estimate)
        skip = estimate.degenerate
        if skip:
            excluded.append(epsilon)
            logger.warning("epsilon=%g excluded from the fit: ESS %.3g", epsilon, estimate.ess)
        rows.append(SweepRow(
            epsilon=epsilon,
            p_hat=estimate.p_hat,
            neg_eps_log_p=estimate.neg_eps_log_p,
            ci_lo=ci_lo,
            ci_hi=ci_hi,
            ess=estimate.ess,
            method=estimate.method,
            upper_bound=estimate.upper_bound,
            excluded=skip,
        ))
    usable = [row for row in rows if not row.excluded]
    if len(usable) < 2:
        raise WeightDegeneracyError(f"only {len(usable)} usable epsilon values, the fit needs two")
    slope, intercept = np.polyfit([row.epsilon for row in usable], [row.neg_eps_log_p for row in usable], 1)
    result = SweepResult(rows, float(intercept), float(slope), float(rate), excluded)
    logger.info("sweep limit %.6g against minimal action %.6g (gap %.2f%%)", result.intercept, rate, 100 * result.gap)
    return result


def boundary_problem(event, dynamics, u0, beta, settings=None):
    """
    Minimum-action problem for the event's boundary: the hyperplane
    (u(T), e) = x for threshold events, the ball centre for terminal balls.
    """
    settings = settings or OptimizerSettings()
    if event.kind == 'terminal_threshold':
        return RateProblem(dynamics, u0, 'observable', event.threshold, beta, observable=event.observable, settings=settings)
    if event.kind == 'terminal_ball':
        return RateProblem(dynamics, u0, 'endpoint', event.reference.terminal, beta, settings=settings)
    raise ValueError(f"no boundary parametrization for {event.kind} events")


def dominating_point(event, dynamics, u0, beta, settings=None):
    """RateResult whose control tilts the importance sampler"""
    return minimize(boundary_problem(event, dynamics, u0, beta, settings))
