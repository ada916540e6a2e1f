import logging

import numpy as np

from drift.conditions import ConditionReport, magnitude
from spectral.grid import Field
from .operators import hs_norm_sq, lipschitz_check

logger = logging.getLogger(__name__)


def random_states(spec, count, scale, seed):
    rng = np.random.Generator(np.random.Philox(key=seed))
    return [Field(spec.grid, scale * rng.standard_normal(spec.grid.shape)) for _ in range(count)]


def check_noise_conditions(spec, sample_spec, field_samples=32):
    """Margins of the sigma_2 Lipschitz/growth conditions and the derived HS bounds"""
    sample_spec.check()
    family = spec.sigma2
    s = sample_spec.states()
    s1, s2 = sample_spec.state_pairs()
    column = (slice(None), None)

    jump = np.abs(family.evaluate(s1) - family.evaluate(s2))
    lipschitz = family.lipschitz[column] * np.abs(s1 - s2)
    report = ConditionReport()
    report.add(
        'sig1', lipschitz - jump, magnitude(lipschitz, jump),
        declared={'alpha': family.lipschitz.tolist()},
    )

    size = np.abs(family.evaluate(s))
    growth = family.offset[column] + family.growth[column] * np.abs(s)
    report.add(
        'sig2', growth - size, magnitude(growth, size),
        declared={'beta': family.offset.tolist(), 'gamma': family.growth.tolist()},
    )

    total = spec.summability()
    report.add(
        'sig3', np.array([0.0 if np.isfinite(total) else -np.inf]), 1.0,
        empirical={'sum_alpha_beta_gamma_sq': total, 'modes': spec.K},
    )

    scale = max(abs(v) for v in sample_spec.u_range)
    t = sample_spec.times()[0]
    states = random_states(spec, field_samples, scale, sample_spec.seed)
    additive = 2.0 * spec.envelope(t) ** 2 * float(np.sum(spec.additive_norms_sq()))
    L1 = spec.growth_constant()
    norms = np.array([hs_norm_sq(spec, t, u) for u in states])
    bounds = np.array([L1 * (1.0 + float(np.sum(u.values ** 2)) * spec.grid.cell_volume) + additive for u in states])
    report.add(
        'sig6', bounds - norms, magnitude(bounds, norms),
        declared={'L1': L1, 'additive': additive},
    )

    others = random_states(spec, field_samples, scale, sample_spec.seed + 1)
    excess = np.array([lipschitz_check(spec, t, u1, u2) for u1, u2 in zip(states, others)])
    report.add('sig7', -excess, magnitude(excess))
    logger.info("noise conditions checked for K=%d modes", spec.K)
    return report
