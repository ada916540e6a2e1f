"""
Naive and Girsanov importance-sampled Monte Carlo estimates of P(u^eps in B).

Importance sampling simulates the shifted equation and weights each hit
by exp(logRN), the likelihood ratio of the unshifted law; the weights are
summed after subtracting the largest log-weight, so v = 0 reduces to the
naive count exactly. Both estimators report the effective sample size of
the hit weights 1_B w, so a naive estimate has ESS = hits.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from fwlab.exceptions import WeightDegeneracyError
from spde.ensemble import iter_ensemble

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
MIN_ESS = 10.0


@dataclass(frozen=True)
class MCEstimate:
    method: str
    p_hat: float
    log_p_hat: float
    std_error: float
    ess: float
    samples: int
    hits: int
    epsilon: float
    seed: int
    upper_bound: bool = False
    blow_ups: int = 0

    @property
    def degenerate(self):
        return self.ess < MIN_ESS

    @property
    def confidence_interval(self):
        half = 1.96 * self.std_error
        return max(self.p_hat - half, 0.0), min(self.p_hat + half, 1.0)

    @property
    def neg_eps_log_p(self):
        return -self.epsilon * self.log_p_hat

    def check_weights(self):
        if self.degenerate:
            raise WeightDegeneracyError(
                f"effective sample size {self.ess:.3g} below {MIN_ESS:g} at epsilon={self.epsilon}"
            )

    def as_dict(self):
        return {
            'method': self.method,
            'p_hat': self.p_hat,
            'log_p_hat': self.log_p_hat,
            'std_error': self.std_error,
            'ess': self.ess,
            'samples': self.samples,
            'hits': self.hits,
            'epsilon': self.epsilon,
            'seed': self.seed,
            'upper_bound': self.upper_bound,
            'blow_ups': self.blow_ups,
            'neg_eps_log_p': self.neg_eps_log_p,
        }


def check_samples(samples):
    if samples < MIN_SAMPLES:
        raise ValueError(f"a Monte Carlo estimate needs at least {MIN_SAMPLES} samples, got {samples}")


def estimate_naive(event, epsilon, samples, dynamics, u0, seed, chunk_size=None, threads=None):
    """p_hat = hits / N with the binomial standard error"""
    check_samples(samples)
    hits = 0
    blow_ups = 0
    for chunk in iter_ensemble(u0, epsilon, dynamics, seed, samples, chunk_size=chunk_size, threads=threads):
        hits += int(np.count_nonzero(event.evaluate_states(chunk.states) & chunk.finite))
        blow_ups += int(np.count_nonzero(~chunk.finite))
    if blow_ups:
        logger.warning("%d of %d trajectories blew up and count as misses", blow_ups, samples)
    p_hat = hits / samples
    upper_bound = hits == 0
    log_p_hat = math.log(1.0 / samples) if upper_bound else math.log(p_hat)
    return MCEstimate(
        method='naive',
        p_hat=p_hat,
        log_p_hat=log_p_hat,
        std_error=math.sqrt(p_hat * (1.0 - p_hat) / samples),
        ess=float(hits),
        samples=samples,
        hits=hits,
        epsilon=epsilon,
        seed=seed,
        upper_bound=upper_bound,
        blow_ups=blow_ups,
    )


def estimate_is(event, epsilon, control, samples, dynamics, u0, seed, chunk_size=None, threads=None):
    """p_hat = mean of 1_B exp(logRN) under the dynamics shifted by control"""
    check_samples(samples)
    log_weights = []
    blow_ups = 0
    for chunk in iter_ensemble(u0, epsilon, dynamics, seed, samples, control, chunk_size, threads):
        hit = event.evaluate_states(chunk.states) & chunk.finite
        log_weights.append(np.where(hit, chunk.log_weights, -np.inf))
        blow_ups += int(np.count_nonzero(~chunk.finite))
    log_weights = np.concatenate(log_weights)
    hits = int(np.count_nonzero(np.isfinite(log_weights)))
    if blow_ups:
        logger.warning("%d of %d shifted trajectories blew up and count as misses", blow_ups, samples)
    if hits == 0:
        return MCEstimate(
            method='is', p_hat=0.0, log_p_hat=math.log(1.0 / samples), std_error=0.0, ess=0.0,
            samples=samples, hits=0, epsilon=epsilon, seed=seed, upper_bound=True, blow_ups=blow_ups,
        )
    shift = float(np.max(log_weights))
    scaled = np.exp(log_weights - shift)
    total = float(np.sum(scaled))
    mean_scaled = total / samples
    p_hat = math.exp(shift) * mean_scaled
    std_error = math.exp(shift) * float(np.std(scaled)) / math.sqrt(samples)
    ess = total ** 2 / float(np.sum(scaled ** 2))
    estimate = MCEstimate(
        method='is',
        p_hat=min(p_hat, 1.0),
        log_p_hat=shift + math.log(mean_scaled),
        std_error=std_error,
        ess=ess,
        samples=samples,
        hits=hits,
        epsilon=epsilon,
        seed=seed,
        blow_ups=blow_ups,
    )
    if estimate.degenerate:
        logger.warning("degenerate importance weights at epsilon=%g: ESS %.3g", epsilon, ess)
    return estimate
