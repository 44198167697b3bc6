"""Instance generators, metrics and drivers for the numerical studies.

Three studies are covered: closest point violating at most ``r`` of ``m``
equations (cpv), piecewise constant fitting (pcf) and concave minimization
over a norm ball. ``cycle_run`` replays the two-dimensional period-8 orbit of
plain ADMM with an injective linear map.
"""

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .admm import (
    AdmmConfig,
    BetaHeuristic,
    admm_solve,
    stationarity_residuals,
    warm_start_from_l1,
)
from .core import ContractError, DenseOperator, FirstDifference
from .pg import PgConfig, pg_solve
from .prox import Cardinality, FiniteSet, L0Ball, L1Ball, L1Penalty, LinfBall
from .rng import RngStream
from .smooth import NegatedLeastSquares, Proximity

__all__ = [
    "CpvInstance",
    "PcfInstance",
    "ConcaveInstance",
    "CycleTrace",
    "CycleVerdict",
    "CpvRow",
    "PcfRow",
    "ConcaveRow",
    "VIOLATION_TOL",
    "gen_cpv",
    "gen_pcf",
    "gen_concave",
    "metric_vio",
    "metric_card",
    "metric_err",
    "run_cpv",
    "run_pcf",
    "run_concave",
    "l1_baseline",
    "warm_start_nonstationarity",
    "cycle_run",
    "cycle_check",
    "cycle_table",
]

VIOLATION_TOL = 1e-4


# ---------------------------------------------------------------------------
# metrics


def metric_vio(M, b, x):
    """Number of equations with ``|(M x - b)_i| > 1e-4``."""
    return int(np.count_nonzero(np.abs(M.apply(x) - b) > VIOLATION_TOL))


def metric_card(v):
    return int(np.count_nonzero(np.abs(v) > VIOLATION_TOL))


def metric_err(x, x_orig):
    """Relative recovery error ``||x - x_orig|| / ||x_orig||``."""
    return float(np.linalg.norm(np.asarray(x) - x_orig) / np.linalg.norm(x_orig))


# ---------------------------------------------------------------------------
# generators


@dataclass
class CpvInstance:
    M: DenseOperator
    b: np.ndarray
    x_hat: np.ndarray
    x_orig: np.ndarray
    r: int
    seed: int = 0

    @property
    def m(self):
        return self.M.rows

    @property
    def n(self):
        return self.M.cols


def gen_cpv(m, n, r, seed):
    """Random cpv instance in which ``m - r`` equations hold at ``x_orig``.

    Draw order: ``M`` (column-major), ``x_orig``, a permutation ``J`` of the
    rows, ``b``, then ``x_hat``. Rows ``J[:m-r]`` of ``b`` are overwritten
    with ``M x_orig``.
    """
    if not n >= m >= r >= 0 or m < 1:
        raise ContractError("need n >= m >= r >= 0 and m >= 1")
    rng = RngStream(seed)
    a = rng.randn_matrix(m, n)
    x_orig = rng.randn(n)
    perm = rng.randperm(m)
    b = rng.randn(m)
    keep = perm[: m - r]
    op = DenseOperator(a)
    b[keep] = op.apply(x_orig)[keep]
    x_hat = rng.randn(n)
    assert np.count_nonzero(op.apply(x_orig) - b) <= r
    return CpvInstance(op, b, x_hat, x_orig, int(r), int(seed))


@dataclass
class PcfInstance:
    n: int
    r: int
    tau: float
    x_orig: np.ndarray
    x_hat: np.ndarray
    breakpoints: np.ndarray
    seed: int = 0


def gen_pcf(n, r, tau, seed):
    """Piecewise constant signal with ``r`` pieces plus ``tau`` Gaussian noise.

    Piece starts are ``r - 1`` distinct positions drawn from ``1..n-2``
    (0-based), sorted; each piece gets its own standard normal level.
    """
    if not 2 <= r <= n - 1:
        raise ContractError("need 2 <= r <= n - 1")
    rng = RngStream(seed)
    starts = np.sort(rng.randperm(n - 2)[: r - 1] + 1)
    x_orig = np.zeros(n)
    bounds = [0, *starts.tolist(), n]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        x_orig[lo:hi] = rng.randn()
    x_hat = x_orig + tau * rng.randn(n)
    assert np.count_nonzero(np.diff(x_orig)) == r - 1
    return PcfInstance(int(n), int(r), float(tau), x_orig, x_hat, starts, int(seed))


@dataclass
class ConcaveInstance:
    A: DenseOperator
    b: np.ndarray
    ball: str
    seed: int = 0

    @property
    def n(self):
        return self.A.cols


def gen_concave(m, n, seed, ball="l1"):
    if m < 1 or n < 1:
        raise ContractError("need m, n >= 1")
    if ball not in ("l1", "linf"):
        raise ContractError("ball must be 'l1' or 'linf'")
    rng = RngStream(seed)
    a = rng.randn_matrix(m, n)
    b = rng.randn(m)
    return ConcaveInstance(DenseOperator(a), b, ball, int(seed))


# ---------------------------------------------------------------------------
# drivers


@dataclass
class CpvRow:
    mode: str
    r: int
    n: int
    iter: int
    cpu_s: float
    vio: int
    dist: float
    x: np.ndarray = field(repr=False)
    objective: float = math.nan
    start_objective: float = math.nan
    report: object = field(default=None, repr=False)


def l1_baseline(inst, grid=5, tol=1e-8, max_iter=200_000):
    """Convex substitute: ``min 0.5||x - x_hat||^2 + lam ||M x - b||_1``.

    ``lam`` runs over ``lam_ref * 10**linspace(-4, 0, grid)``, where
    ``lam_ref = ||(M M^*)^{-1}(M x_hat - b)||_inf`` is large enough to
    enforce every equation. The smallest ``lam`` whose solution violates at
    most ``r`` equations is kept (the largest one otherwise).

    Returns ``(report, lam)``.
    """
    M = inst.M
    h = Proximity(inst.x_hat)
    w = np.linalg.solve(M.gram_out(), M.apply(inst.x_hat) - inst.b)
    lam_ref = float(np.abs(w).max())
    beta = 1.01 * 2.0 / M.sigma()
    best = None
    for lam in lam_ref * 10.0 ** np.linspace(-4.0, 0.0, grid):
        rep = admm_solve(h, L1Penalty(lam, center=inst.b), M,
                         AdmmConfig(beta=beta, tol=tol, max_iter=max_iter))
        best = (rep, float(lam))
        if metric_vio(M, inst.b, rep.x_final) <= inst.r:
            break
    return best


def run_cpv(inst, mode, tol=1e-8, max_iter=200_000, baseline=None):
    """One row of the cpv table for ``mode`` in l0_cold, l1_baseline, l0_warm.

    ``baseline`` may carry a precomputed ``l1_baseline`` result for the
    warm start.
    """
    M, b = inst.M, inst.b
    h = Proximity(inst.x_hat)
    P = L0Ball(b, inst.r)
    beta = 1.01 * 2.0 / M.sigma()
    start = time.perf_counter()
    start_obj = math.nan
    if mode == "l0_cold":
        rep = admm_solve(h, P, M, AdmmConfig(beta=beta, tol=tol, max_iter=max_iter))
    elif mode == "l1_baseline":
        rep, _ = baseline if baseline is not None else l1_baseline(inst, tol=tol, max_iter=max_iter)
    elif mode == "l0_warm":
        relax, _ = baseline if baseline is not None else l1_baseline(inst, tol=tol, max_iter=max_iter)
        init = warm_start_from_l1(h, M, relax)
        # relax.y_final is the exact prox output matching M x0 to within tol
        py = P.value(relax.y_final)
        start_obj = math.inf if py == math.inf else h.value(init[0]) + py
        rep = admm_solve(h, P, M, AdmmConfig(beta=beta, tol=tol, max_iter=max_iter), init=init)
    else:
        raise ContractError(f"unknown cpv mode {mode!r}")
    cpu = time.perf_counter() - start
    x = rep.x_final
    return CpvRow(
        mode=mode, r=inst.r, n=inst.n, iter=rep.iters, cpu_s=cpu,
        vio=metric_vio(M, b, x), dist=float(np.linalg.norm(x - inst.x_hat)),
        x=x, objective=rep.objective if mode != "l1_baseline" else h.value(x),
        start_objective=start_obj, report=rep,
    )


def warm_start_nonstationarity(inst, baseline):
    """``r_prox_fixed_point`` of the warm start for the l0 problem."""
    M = inst.M
    h = Proximity(inst.x_hat)
    beta = 1.01 * 2.0 / M.sigma()
    x0, y0, z0 = warm_start_from_l1(h, M, baseline[0])
    return stationarity_residuals(h, L0Ball(inst.b, inst.r), M, beta, x0, y0, z0).r_prox_fixed_point


@dataclass
class PcfRow:
    tau: float
    r: int
    n: int
    iter: int
    cpu_s: float
    card: int
    err: float
    x: np.ndarray = field(repr=False)
    report: object = field(default=None, repr=False)


def run_pcf(inst, tol=1e-8, max_iter=200_000):
    """l0-constrained fit with ``M = D`` and the penalty continuation.

    ``beta`` starts at ``1 / (5 n sigma)`` with ``sigma = lambda_min(D D^*)``.
    """
    D = FirstDifference(inst.n)
    sigma = D.sigma()
    heur = BetaHeuristic(beta0=1.0 / (5.0 * inst.n * sigma))
    start = time.perf_counter()
    rep = admm_solve(Proximity(inst.x_hat), Cardinality(inst.r - 1), D,
                     AdmmConfig(beta_heuristic=heur, tol=tol, max_iter=max_iter))
    cpu = time.perf_counter() - start
    x = rep.x_final
    return PcfRow(inst.tau, inst.r, inst.n, rep.iters, cpu, metric_card(D.apply(x)),
                  metric_err(x, inst.x_orig), x, rep)


@dataclass
class ConcaveRow:
    n: int
    lambda_max: float
    beta_mult: float
    iter: int
    fval: float
    cpu_s: float
    ell: float
    x: np.ndarray = field(repr=False)
    report: object = field(default=None, repr=False)


def run_concave(inst, multipliers=(1.0, 2.0, 10.0, 50.0), tol=1e-8, max_iter=100_000,
                record_history=False):
    """Proximal gradient from the origin with ``beta = k / lambda_max(A^* A)``.

    The objective is concave, so any ``ell > 0`` certifies descent; each run
    uses ``ell = 1e-3 * lambda_max``.
    """
    h = NegatedLeastSquares(inst.A, inst.b)
    P = L1Ball(1.0) if inst.ball == "l1" else LinfBall(1.0)
    lam = inst.A.lambda_max_gram()
    ell = 1e-3 * lam
    rows = []
    for k in multipliers:
        cfg = PgConfig(beta=k / lam, ell=ell, tol=tol, max_iter=max_iter,
                       record_history=record_history)
        rep = pg_solve(h, P, cfg, np.zeros(inst.n))
        rows.append(ConcaveRow(inst.n, lam, float(k), rep.iters, rep.objective,
                               rep.cpu_s, ell, rep.x_final, rep))
    return rows


# ---------------------------------------------------------------------------
# period-8 counterexample


@dataclass
class CycleTrace:
    eta: float
    beta: float
    iterates: List[tuple]  # (y1, y2, x, z1, z2) for t = 0..steps


@dataclass
class CycleVerdict:
    period: Optional[int]
    table_error: float
    period_error: float
    passed: bool


def cycle_run(eta, beta, steps=80):
    """Plain ADMM on ``x in C, x in D`` with ``M x = (x, x)``.

    ``C = {x : x_2 = 0}``, ``D = {(0,0), (2,eta), (2,-eta)}``; starts at
    ``x = (2, 0)``, ``z1 = (0, -beta eta)``, ``z2 = (0, beta eta)``. Ties in
    the projection onto ``D`` go to the point nearest the previous ``y2``.
    """
    if not 0.0 < eta <= 1.0:
        raise ContractError("eta must lie in (0, 1]")
    if not beta > 0:
        raise ContractError("beta must be positive")
    D = FiniteSet([[0.0, 0.0], [2.0, eta], [2.0, -eta]])
    x = np.array([2.0, 0.0])
    z1 = np.array([0.0, -beta * eta])
    z2 = np.array([0.0, beta * eta])
    y1 = np.array([2.0, 0.0])
    y2 = None
    states = [(y1, np.full(2, np.nan), x, z1, z2)]
    for _ in range(steps):
        u1 = x - z1 / beta
        y1 = np.array([u1[0], 0.0])
        y2 = D.prox(x - z2 / beta, 1.0 / beta, prev=y2)
        x = 0.5 * (y1 + z1 / beta + y2 + z2 / beta)
        z1 = z1 - beta * (x - y1)
        z2 = z2 - beta * (x - y2)
        states.append((y1, y2, x, z1, z2))
    return CycleTrace(float(eta), float(beta), states)


def cycle_table(eta, beta, t):
    """Closed-form state ``(y1, y2, x, z1, z2)`` for ``1 <= t <= 8``."""
    sign = -1.0 if t <= 4 else 1.0
    zz = np.array([0.0, (2.0 - abs(t - 4)) * beta * eta / 2.0])
    return (np.array([2.0, 0.0]), np.array([2.0, sign * eta]),
            np.array([2.0, sign * eta / 2.0]), zz, -zz)


def _state_gap(a, b):
    return max(float(np.max(np.abs(u - v))) for u, v in zip(a, b))


def cycle_check(trace, tol=1e-12):
    """Compare against the closed-form table and find the period (t >= 1)."""
    states = trace.iterates
    table_err = max(_state_gap(states[t], cycle_table(trace.eta, trace.beta, t))
                    for t in range(1, min(9, len(states))))
    period = None
    period_err = math.inf
    for p in range(1, len(states) - 1):
        err = max(_state_gap(states[t], states[t + p]) for t in range(1, len(states) - p))
        if err <= tol:
            period, period_err = p, err
            break
    passed = len(states) > 16 and table_err <= tol and period == 8
    return CycleVerdict(period, table_err, period_err, passed)
