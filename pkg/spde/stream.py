from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseStream:
    """
    Brownian increments of one trajectory, keyed by (seed, index) on a
    counter-based Philox generator.

    The increment of (step m, mode k) is always the (m K + k)-th normal
    drawn from the key, so a trajectory does not depend on which worker
    or chunk produced it.
    """
    seed: int
    index: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.index < 0:
            raise ValueError(f"seed and index must be nonnegative, got ({self.seed}, {self.index})")

    def generator(self):
        return np.random.Generator(np.random.Philox(key=[self.seed, self.index]))

    def increments(self, steps, modes, dt):
        """dW of shape (steps, modes), i.i.d. N(0, dt)"""
        return np.sqrt(dt) * self.generator().standard_normal((steps, modes))


def batch_increments(seed, indices, steps, modes, dt):
    return np.stack([NoiseStream(seed, int(i)).increments(steps, modes, dt) for i in indices])
