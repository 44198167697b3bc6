"""Proximal gradient (forward-backward splitting) for ``M = I``.

    x+ = prox_{beta P}(x - beta grad h(x))

The step only has to satisfy ``beta < 1 / ell`` where ``ell`` bounds the
curvature of ``h + q`` for some convex ``q``; the concave part of ``h``
places no restriction on the step.
"""

import math
import time
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .admm import DivergenceError
from .core import ContractError, as_vector, extreme_eigenvalues

__all__ = ["PgConfig", "PgReport", "PgHistoryEntry", "estimate_ell", "pg_solve"]


def estimate_ell(h, eps=None):
    """Curvature constant ``ell`` and a description of the convex ``q``.

    Parameters
    ----------
    h : SmoothModel
    eps : float, optional
        The ``ell`` to use when ``h`` is concave, where any positive value
        is valid. Required in that case.

    Returns
    -------
    ell : float
    q : str
    """
    kind = h.kind
    if kind == "negated_least_squares":
        return _concave_ell(eps), "q = 0.5 ||A x||^2"
    if kind == "indefinite_quadratic":
        lam1, neg = extreme_eigenvalues(h.Q)
        lam2 = -neg
        if lam1 <= 0:
            return _concave_ell(eps), "q = -0.5 <x, Q x>"
        if lam2 <= 0:
            return lam1, "q = 0"
        if lam1 < lam2:
            return 0.5 * (lam1 + lam2), f"q = {(lam2 - lam1) / 4:.17g} ||x||^2"
        return lam1, "q = -0.5 <x, Q_- x>"
    return h.hessian_bounds()[0], "q = 0"


def _concave_ell(eps):
    if eps is None or not eps > 0:
        raise ContractError("concave h: pass the ell to certify with (any eps > 0)")
    return float(eps)


@dataclass
class PgConfig:
    beta: float
    ell: float
    tol: float = 1e-8
    max_iter: int = 100_000
    record_history: bool = False

    def __post_init__(self):
        if not self.ell > 0:
            raise ContractError("ell must be positive")
        if not 0.0 < self.beta < (1.0 / self.ell) * (1.0 - 1e-15):
            raise ContractError(f"step {self.beta} not in (0, 1/ell = {1.0 / self.ell})")
        if not self.tol > 0:
            raise ContractError("tol must be positive")
        if self.max_iter < 1:
            raise ContractError("max_iter must be positive")


class PgHistoryEntry(NamedTuple):
    t: int
    objective: float
    step: float


@dataclass
class PgReport:
    termination: str
    iters: int
    x_final: np.ndarray
    objective: float
    residual: float
    ell: float
    descent_sum: float
    cpu_s: float
    history: Optional[list] = None


def pg_solve(h, P, config, x0):
    """Fixed-step proximal gradient.

    Every step is checked against the descent bound
    ``F(x+) <= F(x) - (1/(2 beta) - ell/2) ||x+ - x||^2`` with slack
    ``1e-8 (1 + |F(x)|)``; a violation ends the run with
    ``termination="descent_violation"``.

    Raises
    ------
    DivergenceError
        On a non-finite iterate, which means ``ell`` was too small.
    """
    x = as_vector(x0, name="x0")
    beta = config.beta
    decrease = 0.5 / beta - 0.5 * config.ell
    history = [] if config.record_history else None

    def objective(v):
        pv = P.value(v)
        return math.inf if pv == math.inf else h.value(v) + pv

    start = time.process_time()
    f = objective(x)
    termination = "max_iter"
    step_sq_sum = 0.0
    t = 0
    while t < config.max_iter:
        x_new = P.prox(x - beta * h.gradient(x), beta, prev=x)
        t += 1
        if not np.all(np.isfinite(x_new)):
            raise DivergenceError(f"non-finite iterate at t={t}")
        step = float(np.linalg.norm(x_new - x))
        f_new = objective(x_new)
        step_sq_sum += step * step
        if history is not None:
            history.append(PgHistoryEntry(t, f_new, step))
        if f != math.inf and f_new > f - decrease * step * step + 1e-8 * (1.0 + abs(f)):
            x, f = x_new, f_new
            termination = "descent_violation"
            break
        x, f = x_new, f_new
        if step / (np.linalg.norm(x) + 1.0) < config.tol:
            termination = "converged"
            break
    cpu = time.process_time() - start
    residual = float(np.linalg.norm(x - P.prox(x - beta * h.gradient(x), beta, prev=x)))
    return PgReport(
        termination=termination, iters=t, x_final=x, objective=f,
        residual=residual, ell=config.ell, descent_sum=step_sq_sum, cpu_s=cpu,
        history=history,
    )
