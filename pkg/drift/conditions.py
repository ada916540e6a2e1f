"""
Sampling verifiers for the drift structure conditions.

Each condition is turned into "right side minus left side" and minimized
over a sample cloud; a negative margin means the condition is violated on
the declared ranges.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from fwlab.exceptions import ConditionSampleError

logger = logging.getLogger(__name__)

# Relative slack for equality cases that rounding pushes below zero
ROUNDING_SLACK = 1e-9


@dataclass(frozen=True)
class SampleSpec:
    t_range: tuple = (0.0, 1.0)
    u_range: tuple = (-10.0, 10.0)
    t_samples: int = 1
    u_samples: int = 2001
    pairs: int = 20000
    seed: int = 0

    def check(self):
        if self.t_samples < 1 or self.u_samples < 1 or self.pairs < 1:
            raise ConditionSampleError("condition check needs a non-empty sample cloud")

    def times(self):
        return np.linspace(self.t_range[0], self.t_range[1], self.t_samples)

    def states(self):
        return np.linspace(self.u_range[0], self.u_range[1], self.u_samples)

    def state_pairs(self):
        """Random pairs u1 != u2, plus the antipodal pairs (u1, -u1)"""
        rng = np.random.Generator(np.random.Philox(key=self.seed))
        low, high = self.u_range
        first = rng.uniform(low, high, self.pairs)
        second = rng.uniform(low, high, self.pairs)
        u1 = np.concatenate([first, first])
        u2 = np.concatenate([second, -first])
        keep = np.abs(u1 - u2) > 1e-12
        return u1[keep], u2[keep]


@dataclass(frozen=True)
class ConditionMargin:
    name: str
    margin: float
    holds: bool
    declared: dict = field(default_factory=dict)
    empirical: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            'margin': self.margin,
            'holds': self.holds,
            'declared': self.declared,
            'empirical': self.empirical,
        }


def magnitude(*arrays):
    return max(float(np.max(np.abs(a))) for a in arrays)


@dataclass
class ConditionReport:
    entries: dict = field(default_factory=dict)

    def add(self, name, gap, scale, declared=None, empirical=None):
        margin = float(np.min(gap))
        slack = ROUNDING_SLACK * max(1.0, scale)
        entry = ConditionMargin(name, margin, margin >= -slack, declared or {}, empirical or {})
        self.entries[name] = entry
        if not entry.holds:
            logger.warning("condition %s violated, margin %.3e", name, margin)
        return entry

    def merge(self, other):
        self.entries.update(other.entries)
        return self

    @property
    def all_hold(self):
        return all(entry.holds for entry in self.entries.values())

    @property
    def violations(self):
        return [name for name, entry in self.entries.items() if not entry.holds]

    def __getitem__(self, name):
        return self.entries[name]

    def as_dict(self):
        return {name: entry.as_dict() for name, entry in self.entries.items()}


def check_conditions(spec, sample_spec):
    """Worst-case margins of F1-F6 and the strong dissipativeness condition"""
    sample_spec.check()
    p = spec.p
    times = sample_spec.times()
    u = np.tile(sample_spec.states(), len(times))
    t_u = np.repeat(times, sample_spec.u_samples)
    u1, u2 = sample_spec.state_pairs()
    t_pair = np.repeat(times, u1.size)
    u1, u2 = np.tile(u1, len(times)), np.tile(u2, len(times))
    du = u1 - u2

    F = spec.evaluate(t_u, u)
    dF = spec.slope(t_u, u)
    dF_pair = spec.evaluate(t_pair, u1) - spec.evaluate(t_pair, u2)
    f_zero = spec.evaluate(times, np.zeros_like(times))

    report = ConditionReport()
    report.add('F1', -np.abs(f_zero), magnitude(f_zero), declared={'F(t,x,0)': 0.0})

    coercive = F * u
    lower = spec.lambda1 * np.abs(u) ** p - spec.psi1_bound
    report.add(
        'F2', coercive - lower, magnitude(coercive, lower),
        declared={'lambda1': spec.lambda1, 'psi1': spec.psi1_bound},
    )

    envelope = spec.psi2_bound + np.abs(u1) ** (p - 2) + np.abs(u2) ** (p - 2)
    lipschitz = spec.lambda2 * envelope * np.abs(du)
    report.add(
        'F3', lipschitz - np.abs(dF_pair), magnitude(lipschitz, dF_pair),
        declared={'lambda2': spec.lambda2, 'psi2': spec.psi2_bound},
        empirical={'lambda2': float(np.max(np.abs(dF_pair) / (envelope * np.abs(du))))},
    )

    report.add(
        'F4', dF + spec.psi3_bound, magnitude(dF),
        declared={'psi3': spec.psi3_bound},
        empirical={'psi3': float(max(-np.min(dF), 0.0))},
    )

    growth = spec.lambda3 * np.abs(u) ** (p - 1) + spec.psi4_bound
    report.add(
        'F5', growth - np.abs(F), magnitude(growth, F),
        declared={'lambda3': spec.lambda3, 'psi4': spec.psi4_bound},
    )

    slope_bound = spec.lambda2 * (spec.psi2_bound + 2.0 * np.abs(u) ** (p - 2))
    report.add(
        'F6', slope_bound - np.abs(dF), magnitude(slope_bound, dF),
        declared={'lambda2': spec.lambda2, 'psi2': spec.psi2_bound},
    )

    monotone = dF_pair * du
    dissipation = spec.lambda4 * np.abs(du) ** p - spec.psi5_bound * du ** 2
    report.add(
        'Fa', monotone - dissipation, magnitude(monotone, dissipation),
        declared={'lambda4': spec.lambda4, 'psi5': spec.psi5_bound},
        empirical={'lambda4': float(np.min((monotone + spec.psi5_bound * du ** 2) / np.abs(du) ** p))},
    )

    logger.info("drift conditions checked on %d states and %d pairs", u.size, u1.size)
    return report
