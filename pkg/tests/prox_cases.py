"""Randomized oracle comparisons for the prox library, shared by the unit
and acceptance suites. Each function returns the worst gap it saw."""

import numpy as np

from ncsplit.prox import (
    Cardinality,
    L0Ball,
    L0Penalty,
    L1Ball,
    L1Penalty,
    LHalfPenalty,
    LinfBall,
)
from oracles import l0_ball_prox_enum, scalar_prox_grid


def enumeration_gap(cases, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(cases):
        n = int(rng.integers(1, 13))
        budget = int(rng.integers(0, 5))
        u = rng.standard_normal(n) * rng.choice([0.1, 1.0, 10.0])
        if k % 5 == 0:  # exercise magnitude ties
            u = np.round(u)
        if k % 2 == 0:
            center = rng.standard_normal(n)
            op = L0Ball(center, budget)
        else:
            center = np.zeros(n)
            op = Cardinality(budget)
        tau = float(rng.uniform(0.1, 5.0))
        w = op.prox(u, tau)
        _, best = l0_ball_prox_enum(u, center, budget)
        got = op.prox_objective(w, u, tau)
        worst = max(worst, got - best)
    return worst


def scalar_grid_gap(cases, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    makers = [
        (L0Penalty, lambda lam: (lambda w: lam * (w != 0))),
        (L1Penalty, lambda lam: (lambda w: lam * np.abs(w))),
        (LHalfPenalty, lambda lam: (lambda w: lam * np.sqrt(np.abs(w)))),
    ]
    for k in range(cases):
        cls, pen = makers[k % 3]
        lam = float(rng.uniform(0.01, 3.0))
        tau = float(rng.uniform(0.01, 3.0))
        u = float(rng.standard_normal() * rng.choice([0.3, 1.0, 4.0]))
        op = cls(lam)
        w = op.prox(np.array([u]), tau)
        got = op.prox_objective(w, np.array([u]), tau)
        best = scalar_prox_grid(pen(lam), u, tau)
        worst = max(worst, got - best)
    return worst


def projection_gaps(cases, seed=0):
    """Worst idempotence error and worst nonexpansiveness excess."""
    rng = np.random.default_rng(seed)
    idem = expand = 0.0
    for k in range(cases):
        n = int(rng.integers(1, 30))
        radius = float(rng.uniform(0.1, 3.0))
        op = L1Ball(radius) if k % 2 == 0 else LinfBall(radius)
        scale = rng.choice([0.1, 1.0, 10.0])
        u, v = rng.standard_normal(n) * scale, rng.standard_normal(n) * scale
        pu, pv = op.prox(u, 1.0), op.prox(v, 1.0)
        assert op.value(pu) == 0.0
        idem = max(idem, float(np.max(np.abs(op.prox(pu, 1.0) - pu))))
        expand = max(expand, float(np.linalg.norm(pu - pv) - np.linalg.norm(u - v)))
    return idem, expand
