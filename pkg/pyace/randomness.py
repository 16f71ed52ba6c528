from typing import List, Optional, Sequence, Union
import numpy as np


class RandomSource:
    """
    Seeded randomness for everything that samples: scalars, coins, vote choices.
    Wraps a numpy Generator so that a run is reproducible from a single 64-bit seed,
    and child sources can be spawned for independent trials.
    """
    def __init__(self, seed: Union[int, np.random.SeedSequence, None] = None):
        if isinstance(seed, np.random.SeedSequence):
            self.seed_sequence = seed
        else:
            self.seed_sequence = np.random.SeedSequence(seed)
        self.generator = np.random.default_rng(self.seed_sequence)

    def scalar(self, q: int) -> int:
        """
        Uniform integer in [0, q) by wide reduction: 128 extra bits make the bias negligible.
        """
        width = (q.bit_length() + 7) // 8 + 16
        return int.from_bytes(self.generator.bytes(width), "big") % q

    def nonzero_scalar(self, q: int) -> int:
        while True:
            value = self.scalar(q)
            if value: return value

    def coin(self, probability: float) -> bool:
        return bool(self.generator.random() < probability)

    def choice(self, n: int, weights: Optional[Sequence[float]] = None) -> int:
        return int(self.generator.choice(n, p=weights))

    def geometric(self, p: float) -> int:
        return int(self.generator.geometric(p))

    def permutation(self, items: Sequence) -> list:
        order = self.generator.permutation(len(items))
        return [items[i] for i in order]

    def spawn(self, n: int) -> List['RandomSource']:
        return [RandomSource(child) for child in self.seed_sequence.spawn(n)]
