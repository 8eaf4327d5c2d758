"""Seeded randomness for mechanisms and experiments.

All Laplace draws go through an explicit inverse-CDF transform of a PCG64
uniform stream, so that (a) a fixed seed reproduces the exact same sample
sequence everywhere and (b) scaling the noise is an exact multiplication of
the same underlying draws (halving epsilon exactly doubles every sample).
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One SplitMix64 step: a cheap, well-mixed 64-bit hash of ``state``."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Derive an independent child seed from ``(seed, index)``."""
    return splitmix64((seed ^ index) & _MASK64)


class NoiseSource:
    """Deterministic random stream owned by a single mechanism call or run.

    Parallel Monte-Carlo runs must not share a source; derive one per run
    with :meth:`spawn` or :func:`derive_seed`.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, index: int) -> "NoiseSource":
        """Child source for e.g. a client index within a run."""
        return NoiseSource(derive_seed(self.seed, index))

    def laplace(self, scale: float, size: int | None = None):
        """Draw from Laplace(0, scale) via the inverse CDF.

        u ~ Uniform(-1/2, 1/2), x = -scale * sign(u) * ln(1 - 2|u|).
        Consumes exactly one uniform per sample.
        """
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        u = self._gen.random(size) - 0.5
        # 1 - 2|u| can underflow to 0 only for u = -0.5 exactly; keep log finite.
        w = np.maximum(1.0 - 2.0 * np.abs(u), 1e-300)
        x = -scale * np.sign(u) * np.log(w)
        return float(x) if size is None else x

    def integers(self, low: int, high: int, size=None):
        """Uniform integers in [low, high)."""
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of range(n) (Fisher-Yates)."""
        return self._gen.permutation(n)
