"""Proximal operators for the nonsmooth term ``P``.

Each operator evaluates ``P`` and returns one global minimizer of

    tau * P(w) + 0.5 * ||w - u||^2.

When that set has several elements, a deterministic one is chosen: magnitude
ties keep the lowest index, and ties between points of a finite set go to
the candidate nearest ``prev`` (then the lowest index).
"""

import math

import numpy as np

from .core import ContractError

__all__ = [
    "ProxOperator",
    "L0Ball",
    "Cardinality",
    "L0Penalty",
    "L1Penalty",
    "LHalfPenalty",
    "L1Ball",
    "LinfBall",
    "FiniteSet",
    "hard_threshold",
    "soft_threshold",
    "half_threshold",
    "keep_largest",
    "project_l1_ball",
]


def keep_largest(v, k):
    """Zero all but the ``k`` largest-magnitude entries (ties: lowest index)."""
    out = np.zeros_like(v)
    if k <= 0:
        return out
    if k >= v.size:
        return v.copy()
    idx = np.argsort(-np.abs(v), kind="stable")[:k]
    out[idx] = v[idx]
    return out


def soft_threshold(u, t):
    return np.sign(u) * np.maximum(np.abs(u) - t, 0.0)


def hard_threshold(u, t):
    """Keep entries with ``|u_i| > t``; entries exactly at ``t`` go to zero."""
    return np.where(np.abs(u) > t, u, 0.0)


def half_threshold(u, mu):
    """Minimizer of ``mu * sum sqrt|w_i| + 0.5 * ||w - u||^2``.

    Closed form of the half-thresholding operator (Xu et al., 2012), written
    for the scaled objective ``(w - u)^2 + lam * sqrt|w|`` with ``lam = 2 mu``.
    """
    u = np.asarray(u, dtype=float)
    lam = 2.0 * mu
    if lam <= 0:
        return u.copy()
    thresh = (54.0 ** (1.0 / 3.0) / 4.0) * lam ** (2.0 / 3.0)
    a = np.abs(u)
    out = np.zeros_like(u)
    big = a > thresh
    if np.any(big):
        phi = np.arccos(np.clip((lam / 8.0) * (a[big] / 3.0) ** -1.5, -1.0, 1.0))
        out[big] = (2.0 / 3.0) * u[big] * (1.0 + np.cos(2.0 * np.pi / 3.0 - (2.0 / 3.0) * phi))
    return out


def project_l1_ball(u, radius):
    """Euclidean projection onto ``{w : ||w||_1 <= radius}`` by sorting."""
    a = np.abs(u)
    if a.sum() <= radius:
        return u.copy()
    s = np.sort(a)[::-1]
    cums = np.cumsum(s)
    k = np.arange(1, s.size + 1)
    rho = np.nonzero(s * k > cums - radius)[0][-1]
    theta = (cums[rho] - radius) / (rho + 1.0)
    w = np.sign(u) * np.maximum(a - theta, 0.0)
    # rounding can leave ||w||_1 a few ulps above radius; pull it inside
    s = float(np.abs(w).sum())
    while s > radius:
        w *= np.nextafter(radius / s, 0.0)
        s = float(np.abs(w).sum())
    return w


class ProxOperator:
    """Base class: ``value`` evaluates ``P``, ``prox`` returns a minimizer.

    ``coercive`` records whether ``P(y) -> inf`` as ``||y|| -> inf``;
    ``bounded_below`` whether ``inf P > -inf``.
    """

    kind = "abstract"
    coercive = False
    bounded_below = True
    convex = False

    def value(self, y):
        raise NotImplementedError

    def _prox(self, u, tau, prev):
        raise NotImplementedError

    def prox(self, u, tau, prev=None):
        if not tau > 0:
            raise ContractError("prox needs tau > 0")
        u = np.asarray(u, dtype=float)
        return self._prox(u, float(tau), prev)

    def __call__(self, y):
        return self.value(y)

    def prox_objective(self, w, u, tau):
        """``tau * P(w) + 0.5 * ||w - u||^2``."""
        v = self.value(w)
        d = w - u
        if v == math.inf:
            return math.inf
        return tau * v + 0.5 * float(d @ d)


class L0Ball(ProxOperator):
    """Indicator of ``{y : ||y - center||_0 <= budget}``."""

    kind = "indicator_l0_ball"

    def __init__(self, center, budget):
        self.center = np.array(center, dtype=float)
        self.center.setflags(write=False)
        self.budget = int(budget)
        if self.budget < 0:
            raise ContractError("budget must be nonnegative")

    def value(self, y):
        return 0.0 if np.count_nonzero(np.asarray(y) - self.center) <= self.budget else math.inf

    def _prox(self, u, tau, prev):
        return self.center + keep_largest(u - self.center, self.budget)


class Cardinality(ProxOperator):
    """Indicator of ``{y : ||y||_0 <= budget}``."""

    kind = "indicator_card"

    def __init__(self, budget):
        self.budget = int(budget)
        if self.budget < 0:
            raise ContractError("budget must be nonnegative")

    def value(self, y):
        return 0.0 if np.count_nonzero(y) <= self.budget else math.inf

    def _prox(self, u, tau, prev):
        return keep_largest(u, self.budget)


class L0Penalty(ProxOperator):
    """``weight * ||y||_0``. Bounded, hence never coercive."""

    kind = "l0_penalty"

    def __init__(self, weight):
        self.weight = float(weight)
        if self.weight < 0:
            raise ContractError("weight must be nonnegative")

    def value(self, y):
        return self.weight * float(np.count_nonzero(y))

    def _prox(self, u, tau, prev):
        return hard_threshold(u, math.sqrt(2.0 * tau * self.weight))


class L1Penalty(ProxOperator):
    """``weight * ||y - center||_1`` (center defaults to the origin)."""

    kind = "l1_penalty"
    convex = True

    def __init__(self, weight, center=None):
        self.weight = float(weight)
        if self.weight < 0:
            raise ContractError("weight must be nonnegative")
        self.center = None if center is None else np.array(center, dtype=float)
        self.coercive = self.weight > 0

    def value(self, y):
        y = np.asarray(y, dtype=float)
        if self.center is not None:
            y = y - self.center
        return self.weight * float(np.abs(y).sum())

    def _prox(self, u, tau, prev):
        if self.center is None:
            return soft_threshold(u, tau * self.weight)
        return self.center + soft_threshold(u - self.center, tau * self.weight)


class LHalfPenalty(ProxOperator):
    """``weight * sum_i |y_i|^(1/2)``."""

    kind = "l_half_penalty"

    def __init__(self, weight):
        self.weight = float(weight)
        if self.weight < 0:
            raise ContractError("weight must be nonnegative")
        self.coercive = self.weight > 0

    def value(self, y):
        return self.weight * float(np.sqrt(np.abs(y)).sum())

    def _prox(self, u, tau, prev):
        return half_threshold(u, tau * self.weight)


class L1Ball(ProxOperator):
    kind = "indicator_l1_ball"
    coercive = True
    convex = True

    def __init__(self, radius=1.0):
        self.radius = float(radius)
        if self.radius < 0:
            raise ContractError("radius must be nonnegative")

    def value(self, y):
        return 0.0 if float(np.abs(y).sum()) <= self.radius else math.inf

    def _prox(self, u, tau, prev):
        return project_l1_ball(u, self.radius)


class LinfBall(ProxOperator):
    kind = "indicator_linf_ball"
    coercive = True
    convex = True

    def __init__(self, radius=1.0):
        self.radius = float(radius)
        if self.radius < 0:
            raise ContractError("radius must be nonnegative")

    def value(self, y):
        return 0.0 if float(np.max(np.abs(y), initial=0.0)) <= self.radius else math.inf

    def _prox(self, u, tau, prev):
        return np.clip(u, -self.radius, self.radius)


class FiniteSet(ProxOperator):
    """Indicator of a finite point set; the prox is a nearest-point map."""

    kind = "indicator_finite_set"
    coercive = True

    def __init__(self, points):
        pts = np.array(points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise ContractError("finite set needs at least one point")
        pts.setflags(write=False)
        self.points = pts

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return 0.0 if np.any(np.all(self.points == y, axis=1)) else math.inf

    def _prox(self, u, tau, prev):
        d = np.sum((self.points - u) ** 2, axis=1)
        best = np.flatnonzero(d == d.min())
        if best.size > 1 and prev is not None:
            dp = np.sum((self.points[best] - np.asarray(prev, dtype=float)) ** 2, axis=1)
            best = best[dp == dp.min()]
        return self.points[best[0]].copy()
