"""Smooth terms ``h`` with scalar Hessian bounds, and proximal-term specs.

Bounds are scalar multiples of the identity: ``q2 I <= Hess h <= q1 I``,
``lipschitz`` bounds ``||Hess h||``.
"""

from dataclasses import dataclass

import numpy as np

from .core import ContractError, DenseOperator, LinearOperator, extreme_eigenvalues

__all__ = [
    "SmoothModel",
    "LeastSquares",
    "Proximity",
    "NegatedLeastSquares",
    "IndefiniteQuadratic",
    "SmoothFunction",
    "ProximalTerm",
    "bregman_value",
    "BregmanError",
]


class BregmanError(ArithmeticError):
    """Negative Bregman distance: the smoothing constant is too small."""


class SmoothModel:
    """Base class. Quadratic subclasses expose a constant ``hessian()``."""

    kind = "abstract"
    quadratic = False
    coercive = False
    bounded_below = False

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def hessian_bounds(self):
        """Return ``(q1, q2, lipschitz)``."""
        raise NotImplementedError

    @property
    def q1(self):
        return self.hessian_bounds()[0]

    @property
    def q2(self):
        return self.hessian_bounds()[1]

    @property
    def lipschitz(self):
        return self.hessian_bounds()[2]


def _as_op(a):
    return a if isinstance(a, LinearOperator) else DenseOperator(a)


class LeastSquares(SmoothModel):
    """``h(x) = 0.5 ||A x - b||^2``."""

    kind = "least_squares"
    quadratic = True
    bounded_below = True

    def __init__(self, A, b):
        self.A = _as_op(A)
        self.b = np.array(b, dtype=float)
        if self.b.shape != (self.A.rows,):
            raise ContractError("b must have one entry per row of A")
        self._bounds = None

    @property
    def dim(self):
        return self.A.cols

    def value(self, x):
        r = self.A.apply(x) - self.b
        return 0.5 * float(r @ r)

    def gradient(self, x):
        return self.A.adjoint(self.A.apply(x) - self.b)

    def hessian(self):
        return self.A.gram_in()

    def hessian_bounds(self):
        if self._bounds is None:
            lam = self.A.lambda_max_gram()
            self._bounds = (lam, 0.0, lam)
        return self._bounds

    @property
    def coercive(self):
        # coercive iff A is injective
        return self.A.rows >= self.A.cols and self.A.lambda_min_gram_in() > 1e-12


class Proximity(SmoothModel):
    """``h(x) = 0.5 ||x - center||^2``."""

    kind = "proximity"
    quadratic = True
    coercive = True
    bounded_below = True

    def __init__(self, center):
        self.center = np.array(center, dtype=float)
        self.center.setflags(write=False)

    @property
    def dim(self):
        return self.center.size

    def value(self, x):
        d = np.asarray(x, dtype=float) - self.center
        return 0.5 * float(d @ d)

    def gradient(self, x):
        return np.asarray(x, dtype=float) - self.center

    def hessian(self):
        return 1.0

    def hessian_bounds(self):
        return (1.0, 1.0, 1.0)


class NegatedLeastSquares(LeastSquares):
    """``h(x) = -0.5 ||A x - b||^2`` (concave, unbounded below)."""

    kind = "negated_least_squares"
    bounded_below = False

    def value(self, x):
        return -super().value(x)

    def gradient(self, x):
        return -super().gradient(x)

    def hessian(self):
        return -self.A.gram_in()

    def hessian_bounds(self):
        if self._bounds is None:
            lam = self.A.lambda_max_gram()
            self._bounds = (0.0, -lam, lam)
        return self._bounds

    @property
    def coercive(self):
        return False


class IndefiniteQuadratic(SmoothModel):
    """``h(x) = 0.5 <x, Q x> + <c, x>`` with symmetric ``Q``."""

    kind = "indefinite_quadratic"
    quadratic = True

    def __init__(self, Q, c=None):
        q = np.array(Q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ContractError("Q must be square")
        if not np.allclose(q, q.T, rtol=0, atol=1e-12 * max(1.0, np.abs(q).max())):
            raise ContractError("Q must be symmetric")
        q = 0.5 * (q + q.T)
        q.setflags(write=False)
        self.Q = q
        self.c = np.zeros(q.shape[0]) if c is None else np.array(c, dtype=float)
        self._bounds = None

    @property
    def dim(self):
        return self.Q.shape[0]

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ (self.Q @ x)) + float(self.c @ x)

    def gradient(self, x):
        return self.Q @ np.asarray(x, dtype=float) + self.c

    def hessian(self):
        return self.Q

    def hessian_bounds(self):
        if self._bounds is None:
            top, bottom = extreme_eigenvalues(self.Q)
            self._bounds = (top, bottom, max(abs(top), abs(bottom)))
        return self._bounds

    @property
    def coercive(self):
        return self.hessian_bounds()[1] > 0

    @property
    def bounded_below(self):
        q2 = self.hessian_bounds()[1]
        if q2 > 0:
            return True
        # PSD but singular: bounded below only if c is orthogonal to null(Q)
        return False


class SmoothFunction(SmoothModel):
    """A caller-supplied smooth ``h`` with caller-supplied Hessian bounds.

    Not quadratic, so the ADMM x-update must run in linearized mode.
    """

    kind = "generic"

    def __init__(self, value, gradient, q1, q2, lipschitz=None,
                 coercive=False, bounded_below=False):
        if q2 > q1:
            raise ContractError("need q2 <= q1")
        self._value = value
        self._gradient = gradient
        self._bounds = (float(q1), float(q2),
                        float(max(abs(q1), abs(q2)) if lipschitz is None else lipschitz))
        self.coercive = coercive
        self.bounded_below = bounded_below

    def value(self, x):
        return float(self._value(np.asarray(x, dtype=float)))

    def gradient(self, x):
        return np.asarray(self._gradient(np.asarray(x, dtype=float)), dtype=float)

    def hessian_bounds(self):
        return self._bounds


@dataclass(frozen=True)
class ProximalTerm:
    """The proximal term ``phi`` added to the x-subproblem.

    ``mode="zero"`` is plain ADMM. ``mode="l_smoothing"`` uses
    ``phi = (L/2)||x||^2 - h``, which linearizes ``h`` in the x-update; then
    ``Hess phi`` has eigenvalues in ``[0, 2L]`` and ``Hess h + Hess phi = L I``.

    ``t1``, ``t2`` bound ``Hess phi`` from above and below; ``q3`` bounds
    ``(Hess h + Hess phi)^2``. ``q3`` is only filled in by :meth:`bounds`,
    since it depends on ``h`` in zero mode.
    """

    mode: str = "zero"
    L: float = 0.0

    def __post_init__(self):
        if self.mode not in ("zero", "l_smoothing"):
            raise ContractError(f"unknown proximal term mode {self.mode!r}")
        if self.mode == "l_smoothing" and not self.L > 0:
            raise ContractError("l_smoothing needs L > 0")

    @classmethod
    def zero(cls):
        return cls("zero", 0.0)

    @classmethod
    def l_smoothing(cls, L):
        return cls("l_smoothing", float(L))

    def bounds(self, h):
        """Return ``(t1, t2, q3)`` for the smooth term ``h``."""
        if self.mode == "zero":
            q1, q2, _ = h.hessian_bounds()
            return 0.0, 0.0, max(q1 * q1, q2 * q2)
        return 2.0 * self.L, 0.0, self.L * self.L

    def gradient(self, h, x):
        if self.mode == "zero":
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.L * np.asarray(x, dtype=float) - h.gradient(x)


def bregman_value(phi, h, x1, x2):
    """``D_phi(x1, x2)``; always nonnegative for a valid ``phi``."""
    if phi.mode == "zero":
        return 0.0
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    d = x1 - x2
    val = 0.5 * phi.L * float(d @ d) - h.value(x1) + h.value(x2) + float(h.gradient(x2) @ d)
    if val < -1e-10 * (1.0 + abs(h.value(x1)) + abs(h.value(x2))):
        raise BregmanError(f"Bregman distance {val:.3e} < 0: L below the Lipschitz bound of h")
    return val
