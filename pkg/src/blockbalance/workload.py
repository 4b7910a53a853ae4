"""Read-request generation: Poisson batch sizes over a rotating Zipf mixture.

Each step draws a Poisson-sized batch of block reads. Every read picks one of
several Zipf distributions uniformly and maps the sampled popularity rank to a
block id through that distribution's private permutation, so a handful of hot
blocks dominate traffic. Periodically the permutations are regenerated and the
hot set shifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_at_least, check_positive, ensure_rng


@dataclass
class WorkloadConfig:
    num_blocks: int
    num_distributions: int = 3
    zipf_exponent: float = 1.2
    poisson_mean: float = 200.0
    rotation_period: int | None = 1000  # steps between hot-set changes; None disables

    def __post_init__(self):
        check_at_least("num_blocks", self.num_blocks, 1)
        check_at_least("num_distributions", self.num_distributions, 1)
        check_positive("zipf_exponent", self.zipf_exponent)
        check_positive("poisson_mean", self.poisson_mean)
        if self.rotation_period is not None:
            check_at_least("rotation_period", self.rotation_period, 1)


def zipf_weights(num_blocks: int, exponent: float) -> np.ndarray:
    """Probability of popularity rank k: k^-s normalized over ranks 1..C."""
    check_at_least("num_blocks", num_blocks, 1)
    check_positive("exponent", exponent)
    ranks = np.arange(1, num_blocks + 1, dtype=np.float64)
    weights = ranks ** -float(exponent)
    return weights / weights.sum()


class Workload:
    """Stateful request sampler owned by a single environment instance.

    ``permutations[d, rank]`` is the block id holding popularity rank ``rank``
    under distribution ``d``. All randomness flows through the generator
    passed at construction, so identical seeds give identical request streams.
    """

    def __init__(self, config: WorkloadConfig, rng):
        self.config = config
        self._rng = ensure_rng(rng)
        self.zipf_cdf = np.cumsum(zipf_weights(config.num_blocks, config.zipf_exponent))
        # pin the top exactly at 1 so uniform draws can never fall past the end
        self.zipf_cdf[-1] = 1.0
        self.permutations = self._draw_permutations()
        self.steps_since_rotation = 0

    def _draw_permutations(self) -> np.ndarray:
        return np.stack(
            [self._rng.permutation(self.config.num_blocks) for _ in range(self.config.num_distributions)]
        )

    def sample_batch(self) -> np.ndarray:
        """One step's block ids: size ~ Poisson(mean), each id an independent
        uniform-distribution-choice + Zipf-rank draw."""
        n = int(self._rng.poisson(self.config.poisson_mean))
        if n == 0:
            return np.empty(0, dtype=np.int64)
        which = self._rng.integers(0, self.config.num_distributions, size=n)
        ranks = np.searchsorted(self.zipf_cdf, self._rng.random(n), side="right")
        return self.permutations[which, ranks]

    def rotate(self):
        """Regenerate all permutations, shifting which blocks are hot."""
        self.permutations = self._draw_permutations()
        self.steps_since_rotation = 0

    def advance(self):
        """Step clock tick; rotates once the configured period elapses."""
        self.steps_since_rotation += 1
        period = self.config.rotation_period
        if period is not None and self.steps_since_rotation >= period:
            self.rotate()

    def reset(self):
        """Fresh hot sets for a new episode."""
        self.rotate()

    def rng_state(self):
        return self._rng.bit_generator.state

    def mixture_pmf(self) -> np.ndarray:
        """Analytic per-block probability under the current permutations."""
        weights = zipf_weights(self.config.num_blocks, self.config.zipf_exponent)
        rank_of_block = np.argsort(self.permutations, axis=1)
        return weights[rank_of_block].mean(axis=0)
