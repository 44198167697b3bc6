"""Seeded random stream: splitmix64 uniforms, Box-Muller normals.

The stream is counter based, so a block of ``k`` draws is a vectorized
function of ``(seed, counter)`` and identical on every platform.
"""

import numpy as np

__all__ = ["RngStream"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _splitmix64(counters):
    z = counters * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class RngStream:
    """Deterministic random stream owned by a single caller.

    >>> RngStream(7).uniform(2).shape
    (2,)
    """

    def __init__(self, seed):
        self.seed = int(seed) & _MASK
        self.counter = 0

    def _raw(self, k):
        idx = np.arange(self.counter + 1, self.counter + 1 + k, dtype=np.uint64)
        self.counter += k
        with np.errstate(over="ignore"):
            return _splitmix64(idx + np.uint64(self.seed))

    def uniform(self, k):
        """``k`` uniforms on ``[0, 1)`` with 53-bit resolution."""
        return (self._raw(k) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def randn(self, *shape):
        """Standard normals; ``shape`` follows ``numpy.zeros``.

        Each pair of normals consumes two uniforms, so an odd count wastes
        one draw.
        """
        k = int(np.prod(shape)) if shape else 1
        pairs = (k + 1) // 2
        u = self.uniform(2 * pairs)
        u1 = 1.0 - u[0::2]  # (0, 1]
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        z = z[:k]
        return z.reshape(shape) if shape else float(z[0])

    def randn_matrix(self, rows, cols):
        """Column-major fill, like MATLAB's ``randn(rows, cols)``."""
        return self.randn(rows * cols).reshape((rows, cols), order="F")

    def randperm(self, n):
        """Uniform random permutation of ``0..n-1`` (Fisher-Yates)."""
        if n < 1:
            raise ValueError("randperm needs n >= 1")
        perm = np.arange(n)
        u = self.uniform(n - 1) if n > 1 else np.empty(0)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = min(int(u[k] * (i + 1)), i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
