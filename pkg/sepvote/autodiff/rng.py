"""Seeded random number generation.

All randomness in sepvote flows through `Rng`, a thin wrapper over numpy's PCG64 bit generator
(O'Neill's permuted congruential generator, 128-bit state, 64-bit output). PCG64's output stream
is fixed by numpy's stream-compatibility policy, so an identical seed yields an identical draw
sequence on every platform.
"""

from typing import Any

import numpy as np

SEED_MASK = (1 << 64) - 1


class Rng:
    """
    Deterministic random generator bound to a 64-bit seed.

    Attributes:
        seed: The 64-bit seed the generator was created with.
        algorithm: Name of the underlying bit generator.
    """

    algorithm = "PCG64"

    def __init__(self, seed: int) -> None:
        self.seed = int(seed) & SEED_MASK
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def normal(self, shape: tuple[int, ...], std: float = 1.0, dtype: Any = np.float32) -> np.ndarray:
        return (self._gen.standard_normal(shape) * std).astype(dtype)

    def uniform(self, low: float = 0.0, high: float = 1.0, size: Any = None) -> Any:
        return self._gen.uniform(low, high, size)

    def integers(self, low: int, high: int, size: Any = None) -> Any:
        """Draw integers from the half-open range [low, high)."""
        return self._gen.integers(low, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def spawn(self, key: int) -> "Rng":
        """
        Derive an independent child generator from this generator's seed and `key`.

        The child depends only on (seed, key), never on how many draws this generator has made.
        """
        child_seed = np.random.SeedSequence([self.seed, int(key) & SEED_MASK]).generate_state(
            1, dtype=np.uint64
        )[0]
        return Rng(int(child_seed))

    @property
    def state(self) -> dict[str, Any]:
        """JSON-serialisable bit-generator state."""
        return {"seed": self.seed, "bit_generator": self._gen.bit_generator.state}

    @classmethod
    def from_state(cls, state: dict[str, Any]) -> "Rng":
        rng = cls(state["seed"])
        rng._gen.bit_generator.state = state["bit_generator"]
        return rng
