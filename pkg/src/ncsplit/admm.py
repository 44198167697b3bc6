"""Proximal ADMM for ``min_x h(x) + P(M x)`` with surjective ``M``.

One iteration, for the splitting ``y = M x``::

    y+ = prox_{P/beta}(M x - z / beta)
    x+ = argmin_w L_beta(w, y+, z) + D_phi(w, x)
    z+ = z - beta (M x+ - y+)

where ``L_beta(x, y, z) = h(x) + P(y) - <z, Mx - y> + beta/2 ||Mx - y||^2``.
Parameter rules and the boundedness test work with scalar curvature bounds.
"""

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg as sla

from .core import (
    ContractError,
    NotSurjectiveError,
    SpdSystem,
    as_vector,
)
from .smooth import ProximalTerm

__all__ = [
    "AdmmConfig",
    "BetaHeuristic",
    "AdmmState",
    "AdmmReport",
    "AssumptionReport",
    "HistoryEntry",
    "Residuals",
    "UnsupportedConfigurationError",
    "NoValidBetaError",
    "DivergenceError",
    "augmented_lagrangian",
    "check_assumption",
    "suggest_beta",
    "check_boundedness",
    "admm_solve",
    "warm_start_from_l1",
    "stationarity_residuals",
]

SURJECTIVITY_TOL = 1e-12
_EPS = np.finfo(float).eps


class UnsupportedConfigurationError(ContractError):
    pass


class NoValidBetaError(RuntimeError):
    pass


class DivergenceError(FloatingPointError):
    pass


# ---------------------------------------------------------------------------
# parameter rules


@dataclass
class AssumptionReport:
    sigma: float
    delta: float
    gamma_used: float
    margin: float
    assumption_ok: bool
    suggested_beta: float
    rule: str
    beta: float
    bounded_ok: Optional[bool] = None
    bounded_reason: str = "not_checked"

    def as_dict(self):
        return dict(self.__dict__)


def _pattern(h, M, phi):
    if M.is_identity and phi.mode == "l_smoothing":
        return "identity_linearized"
    if M.is_identity and phi.mode == "zero" and h.kind == "least_squares":
        return "identity_least_squares"
    if phi.mode == "zero" and h.kind == "proximity":
        return "surjective_strongly_convex"
    return "generic_search"


def _sigma(M):
    sigma = M.sigma()
    if sigma <= SURJECTIVITY_TOL:
        raise NotSurjectiveError(
            f"lambda_min(M M^*) = {sigma:.3e}: M is not surjective"
        )
    return sigma


def _feasible_gamma(k, q3, t1sq):
    """Midpoint of ``{g in (0,1) : q3/g + t1sq/(1-g) < k}``, or the best g."""
    if t1sq == 0.0:
        if q3 == 0.0:
            return 0.5
        lo = q3 / k
        return 0.5 * (lo + 1.0) if lo < 1.0 else 1.0 - 1e-9
    # k g^2 + (t1sq - q3 - k) g + q3 < 0 between the roots
    bq = t1sq - q3 - k
    disc = bq * bq - 4.0 * k * q3
    if disc > 0.0:
        r = math.sqrt(disc)
        lo = max((-bq - r) / (2.0 * k), 0.0)
        hi = min((-bq + r) / (2.0 * k), 1.0)
        if lo < hi:
            return 0.5 * (lo + hi)
    sq = math.sqrt(q3)
    return sq / (sq + math.sqrt(t1sq))


def _assess(h, M, phi, beta, gamma=None):
    """Core of the assumption check; returns a dict of the pieces."""
    if not beta > 0:
        raise ContractError("beta must be positive")
    sigma = _sigma(M)
    q1, q2, lip = h.hessian_bounds()
    t1, t2, q3 = phi.bounds(h)
    if phi.mode == "l_smoothing":
        # linearized scheme only sees h through its Lipschitz modulus
        q2 = -phi.L
    delta = q2 + t2 + beta * M.lambda_min_gram_in()
    rule = _pattern(h, M, phi)
    if gamma is None:
        gamma = _default_gamma(rule, h, sigma, beta, delta, t2, q3, t1)
    elif not 0.0 < gamma < 1.0:
        raise ContractError("gamma must lie in (0, 1)")
    penalty = (2.0 / (sigma * beta)) * (q3 / gamma + t1 * t1 / (1.0 - gamma))
    margin = delta + t2 - penalty
    if abs(margin) <= 64.0 * _EPS * (abs(delta + t2) + penalty):
        margin = 0.0
    ok = sigma > 0 and delta > 0 and margin > 0
    return dict(sigma=sigma, delta=delta, gamma=gamma, margin=margin, ok=ok,
                rule=rule, t1=t1, t2=t2, q3=q3, lipschitz=lip)


def _default_gamma(rule, h, sigma, beta, delta, t2, q3, t1):
    if rule == "identity_linearized":
        return 0.5
    lo = None
    if rule == "identity_least_squares":
        lo = math.sqrt(2.0) * h.lipschitz / beta
    elif rule == "surjective_strongly_convex":
        lo = 2.0 / (sigma * beta)
    # the midpoint rounds to 1 when lo is within an ulp of it
    if lo is not None and 0.5 * (lo + 1.0) < 1.0:
        return 0.5 * (lo + 1.0)
    k = (delta + t2) * sigma * beta / 2.0
    if k <= 0:
        return 0.5
    # keep gamma strictly inside (0, 1) when the interval collapses
    return min(max(_feasible_gamma(k, q3, t1 * t1), 1e-9), 1.0 - 1e-9)


def suggest_beta(h, M, phi=None):
    """Penalty suggestion ``(beta, gamma, rule)``.

    The three closed-form rules put ``beta`` 1% above the threshold of its
    problem pattern. Anything else falls back to doubling ``beta`` from
    ``max(1, L)`` until the assumption check passes.
    """
    phi = ProximalTerm.zero() if phi is None else phi
    rule = _pattern(h, M, phi)
    if rule == "identity_linearized":
        return 1.01 * 5.0 * phi.L, 0.5, rule
    if rule == "identity_least_squares" and h.lipschitz > 0:
        beta = 1.01 * math.sqrt(2.0) * h.lipschitz
        return beta, 0.5 * (math.sqrt(2.0) * h.lipschitz / beta + 1.0), rule
    if rule == "surjective_strongly_convex":
        sigma = _sigma(M)
        beta = 1.01 * 2.0 / sigma
        return beta, 0.5 * (2.0 / (sigma * beta) + 1.0), rule
    rule = "generic_search"
    beta = max(1.0, h.lipschitz)
    while beta <= 2.0**60:
        a = _assess(h, M, phi, beta)
        if a["ok"]:
            return beta, a["gamma"], rule
        beta *= 2.0
    raise NoValidBetaError("no beta <= 2^60 satisfies the assumption")


def check_assumption(h, M, phi=None, beta=None, gamma=None, P=None):
    """Evaluate the penalty conditions for surjective ``M`` at ``beta``.

    ``beta`` defaults to the suggested value. When ``P`` is given, the
    boundedness test is run as well.

    Raises
    ------
    NotSurjectiveError
        If ``lambda_min(M M^*) <= 1e-12``.
    """
    phi = ProximalTerm.zero() if phi is None else phi
    try:
        sb, _, _ = suggest_beta(h, M, phi)
    except NoValidBetaError:
        sb = math.nan
    if beta is None:
        beta = sb
    a = _assess(h, M, phi, beta, gamma)
    rep = AssumptionReport(
        sigma=a["sigma"], delta=a["delta"], gamma_used=a["gamma"],
        margin=a["margin"], assumption_ok=a["ok"], suggested_beta=sb,
        rule=a["rule"], beta=float(beta),
    )
    if P is not None:
        rep.bounded_ok, rep.bounded_reason = check_boundedness(h, P, M, beta, a["gamma"], phi)
    return rep


def check_boundedness(h, P, M, beta, gamma=None, phi=None):
    """Sufficient conditions for bounded ADMM iterates.

    Needs ``0 < zeta < 2 beta gamma`` with
    ``inf h - ||grad h||^2 / (sigma zeta) > -inf``; ``zeta`` is known in
    closed form for least squares (``2 sqrt(2) L / sigma``) and proximity
    terms (``4 / sigma``). Then either ``M`` is invertible and ``P``
    coercive, or ``h`` is coercive and ``P`` bounded below.

    Returns ``(bounded_ok, reason)``.
    """
    phi = ProximalTerm.zero() if phi is None else phi
    if not h.bounded_below:
        return False, "h_not_bounded_below"
    try:
        sigma = _sigma(M)
    except NotSurjectiveError:
        return False, "not_surjective"
    if h.kind == "least_squares":
        zeta = 2.0 * math.sqrt(2.0) * h.lipschitz / sigma
    elif h.kind == "proximity":
        zeta = 4.0 / sigma
    else:
        return False, "unknown"
    if gamma is None:
        gamma = _assess(h, M, phi, beta)["gamma"]
    if not 0.0 < zeta < 2.0 * beta * gamma:
        return False, "zeta_condition_fails"
    if M.rows == M.cols and P.coercive:
        return True, "invertible_M_coercive_P"
    if h.coercive and P.bounded_below:
        return True, "coercive_h_bounded_P"
    return False, "no_sufficient_condition"


# ---------------------------------------------------------------------------
# evaluation helpers


def augmented_lagrangian(h, P, M, beta, x, y, z):
    py = P.value(y)
    if py == math.inf:
        return math.inf
    r = M.apply(x) - y
    return h.value(x) + py - float(z @ r) + 0.5 * beta * float(r @ r)


class Residuals(NamedTuple):
    r_grad: float
    r_feas: float
    r_prox_fixed_point: float


def stationarity_residuals(h, P, M, beta, x, y, z):
    """Residuals of ``grad h(x) = M^* z``, ``y = M x`` and ``-z in dP(y)``.

    The last one is measured as ``||y - prox_{P/beta}(y - z/beta)||``; this
    characterizes ``-z in dP(y)`` for convex ``P`` and is necessary otherwise.
    """
    r_grad = float(np.linalg.norm(h.gradient(x) - M.adjoint(z)))
    r_feas = float(np.linalg.norm(M.apply(x) - y))
    w = P.prox(y - z / beta, 1.0 / beta, prev=y)
    return Residuals(r_grad, r_feas, float(np.linalg.norm(y - w)))


def warm_start_from_l1(h, M, relaxation_report, P_nonconvex=None):
    """Initial triple from a relaxed solution ``x~``.

    ``x0 = x~``, ``y0 = M x0`` and ``z0`` solves ``M M^* z0 = M grad h(x0)``,
    so that ``M^* z0 = grad h(x0)`` for surjective ``M``. For a proximity
    term this is ``z0 = (M M^*)^{-1} M (x0 - center)``.
    """
    x0 = np.array(relaxation_report.x_final, dtype=float)
    y0 = M.apply(x0)
    g = h.gradient(x0)
    if M.is_identity:
        return x0, y0, g.copy()
    try:
        fac = sla.cho_factor(M.gram_out(), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotSurjectiveError("M M^* is singular") from exc
    z0 = sla.cho_solve(fac, M.apply(g))
    return x0, y0, z0


# ---------------------------------------------------------------------------
# solver


@dataclass(frozen=True)
class BetaHeuristic:
    """Penalty continuation for small ``sigma``.

    Starting from ``beta0``, set ``beta = min(cap_factor * 2/sigma,
    growth * beta)`` whenever ``beta < 2/sigma`` and either
    ``||x|| > blowup_norm`` or ``||x - x_prev|| > step_slack / t``.
    """

    beta0: float
    growth: float = 2.0
    cap_factor: float = 1.0001
    blowup_norm: float = 1e10
    step_slack: float = 1000.0


@dataclass
class AdmmConfig:
    beta: Optional[float] = None
    gamma: Optional[float] = None
    phi: ProximalTerm = field(default_factory=ProximalTerm.zero)
    tol: float = 1e-8
    max_iter: int = 200_000
    beta_heuristic: Optional[BetaHeuristic] = None
    record_history: bool = False
    history_size: int = 10_000

    def __post_init__(self):
        if self.beta_heuristic is not None and self.beta is None:
            self.beta = self.beta_heuristic.beta0
        if self.beta is None or not self.beta > 0:
            raise ContractError("beta must be positive")
        if self.gamma is not None and not 0.0 < self.gamma < 1.0:
            raise ContractError("gamma must lie in (0, 1)")
        if not self.tol > 0:
            raise ContractError("tol must be positive")
        if self.max_iter < 1:
            raise ContractError("max_iter must be positive")


@dataclass
class AdmmState:
    t: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    x_prev: np.ndarray
    y_prev: np.ndarray
    z_prev: np.ndarray
    beta: float
    merit: float


class HistoryEntry(NamedTuple):
    t: int
    merit: float
    dx: float
    dy: float
    dz: float
    beta: float


@dataclass
class AdmmReport:
    termination: str
    iters: int
    x_final: np.ndarray
    y_final: np.ndarray
    z_final: np.ndarray
    residuals: Residuals
    objective: float
    beta_final: float
    gamma: Optional[float]
    assumption_ok: bool
    last_beta_change: int
    cpu_s: float
    history: Optional[list] = None


class _XUpdate:
    """Cached linear solve for the x-subproblem at a fixed ``beta``."""

    def __init__(self, h, M, phi, beta):
        self.h, self.M, self.phi, self.beta = h, M, phi, beta
        if phi.mode == "zero":
            if not h.quadratic:
                raise UnsupportedConfigurationError(
                    "plain ADMM needs a quadratic h; use ProximalTerm.l_smoothing(L)"
                )
            hess = h.hessian()
            if np.isscalar(hess):
                self.system = SpdSystem(M, beta, c=float(hess))
            else:
                self.system = SpdSystem(M, beta, hessian=hess)
            self.g0 = h.gradient(np.zeros(M.cols))
        else:
            self.system = SpdSystem(M, beta, c=phi.L)

    def __call__(self, x, y, z):
        rhs = self.M.adjoint(z + self.beta * y)
        if self.phi.mode == "zero":
            rhs -= self.g0
        else:
            rhs += self.phi.L * x - self.h.gradient(x)
        return self.system.solve(rhs)


def _monitor_setup(h, M, phi, beta, gamma):
    """``(assumption_ok, gamma, correction weight)`` at this ``beta``."""
    try:
        a = _assess(h, M, phi, beta, gamma)
    except NotSurjectiveError:
        return False, gamma, 0.0
    t1 = a["t1"]
    g = a["gamma"]
    weight = 0.5 * (2.0 / (a["sigma"] * beta * (1.0 - g))) * t1 * t1
    return a["ok"], g, weight


def admm_solve(h, P, M, config, init=None, callback=None):
    """Run the proximal ADMM.

    Parameters
    ----------
    h : SmoothModel
    P : ProxOperator
    M : LinearOperator
    config : AdmmConfig
    init : tuple of arrays, optional
        ``(x0, y0, z0)``; zeros by default. ``y0`` only seeds tie-breaking
        in the first prox step.
    callback : callable, optional
        Called with an :class:`AdmmState` after every iteration.

    Returns
    -------
    AdmmReport
        ``objective`` is ``h(x) + P(y)`` at the final iterate: ``y`` is the
        exact prox output while ``M x`` only matches it up to ``r_feas``.

    The merit ``L_beta + (t1^2 / (sigma beta (1 - gamma))) ||x - x_prev||^2``
    is monitored whenever the assumption holds at the current ``beta``; an
    increase beyond ``1e-8 (1 + |merit|)`` ends the run with
    ``termination="merit_violation"``.
    """
    n, m = M.cols, M.rows
    if init is None:
        x, y, z = np.zeros(n), np.zeros(m), np.zeros(m)
    else:
        x = as_vector(init[0], n, "x0")
        y = as_vector(init[1], m, "y0")
        z = as_vector(init[2], m, "z0")
    phi = config.phi
    heur = config.beta_heuristic
    beta = float(config.beta)
    xupd = _XUpdate(h, M, phi, beta)
    ok, gamma, weight = _monitor_setup(h, M, phi, beta, config.gamma)
    sigma = M.sigma() if heur is not None else None
    history = deque(maxlen=config.history_size) if config.record_history else None

    start = time.process_time()
    termination = "max_iter"
    last_change = 0
    merit_prev = None
    t = 0
    while t < config.max_iter:
        y_new = P.prox(M.apply(x) - z / beta, 1.0 / beta, prev=y)
        x_new = xupd(x, y_new, z)
        z_new = z - beta * (M.apply(x_new) - y_new)
        t += 1
        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(z_new))):
            raise DivergenceError(f"non-finite iterate at t={t}")
        dx = float(np.linalg.norm(x_new - x))
        dy = float(np.linalg.norm(y_new - y))
        dz = float(np.linalg.norm(z_new - z))
        merit = augmented_lagrangian(h, P, M, beta, x_new, y_new, z_new) + weight * dx * dx
        if history is not None:
            history.append(HistoryEntry(t, merit, dx, dy, dz, beta))
        if callback is not None:
            callback(AdmmState(t, x_new, y_new, z_new, x, y, z, beta, merit))
        x, y, z = x_new, y_new, z_new

        scale = float(np.linalg.norm(x) + np.linalg.norm(y) + np.linalg.norm(z)) + 1.0
        if (dx + dy + dz) / scale < config.tol:
            termination = "converged"
            break
        if ok and merit_prev is not None and merit > merit_prev + 1e-8 * (1.0 + abs(merit_prev)):
            termination = "merit_violation"
            break
        merit_prev = merit

        if heur is not None and beta < 2.0 / sigma:
            if np.linalg.norm(x) > heur.blowup_norm or dx > heur.step_slack / t:
                beta = min(heur.cap_factor * 2.0 / sigma, heur.growth * beta)
                xupd = _XUpdate(h, M, phi, beta)
                ok, gamma, weight = _monitor_setup(h, M, phi, beta, config.gamma)
                merit_prev = None
                last_change = t
    cpu = time.process_time() - start

    res = stationarity_residuals(h, P, M, beta, x, y, z)
    py = P.value(y)
    objective = math.inf if py == math.inf else h.value(x) + py
    return AdmmReport(
        termination=termination, iters=t, x_final=x, y_final=y, z_final=z,
        residuals=res, objective=objective, beta_final=beta, gamma=gamma,
        assumption_ok=ok, last_beta_change=last_change, cpu_s=cpu,
        history=None if history is None else list(history),
    )
