"""Independent reference computations used by the tests.

Nothing here imports the package: each oracle re-derives its answer from
first principles (Jacobi rotations, bisection, enumeration, grids).
"""

import itertools
import math

import numpy as np


def jacobi_eigenvalues(a, tol=1e-14, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum(np.tril(a, -1) ** 2)))
        if off <= tol * max(1.0, float(np.abs(np.diag(a)).max())):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
    return np.sort(np.diag(a))


def sturm_count(diag, off, x):
    """Number of eigenvalues below ``x`` of a symmetric tridiagonal matrix."""
    count = 0
    d = 1.0
    for i in range(len(diag)):
        b2 = off[i - 1] ** 2 if i > 0 else 0.0
        d = diag[i] - x - (b2 / d if i > 0 else 0.0)
        if d == 0.0:
            d = -1e-300
        if d < 0:
            count += 1
    return count


def sturm_eigenvalue(diag, off, k, tol=1e-13):
    """``k``-th smallest eigenvalue (0-based) of a tridiagonal matrix by bisection."""
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    radius = np.abs(np.concatenate([[0.0], off])) + np.abs(np.concatenate([off, [0.0]]))
    lo, hi = float(np.min(diag - radius)), float(np.max(diag + radius))
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if sturm_count(diag, off, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def l0_ball_prox_enum(u, center, budget):
    """Best point of ``{y : ||y - c||_0 <= budget}`` by trying every support."""
    n = u.size
    best, best_val = None, math.inf
    for k in range(min(budget, n) + 1):
        for supp in itertools.combinations(range(n), k):
            y = center.copy()
            idx = list(supp)
            y[idx] = u[idx]
            val = 0.5 * float(np.sum((y - u) ** 2))
            if val < best_val:
                best, best_val = y, val
    return best, best_val


def scalar_prox_grid(penalty, u, tau, width=None, points=200_001):
    """Minimize ``tau * penalty(w) + 0.5 (w - u)^2`` over a grid plus ``{0, u}``."""
    width = width if width is not None else abs(u) + 1.0
    grid = np.concatenate([np.linspace(-width, width, points), [0.0, u]])
    vals = tau * penalty(grid) + 0.5 * (grid - u) ** 2
    i = int(np.argmin(vals))
    # refine around the grid minimum
    step = 2.0 * width / (points - 1)
    fine = np.linspace(grid[i] - step, grid[i] + step, 2001)
    fv = tau * penalty(fine) + 0.5 * (fine - u) ** 2
    return min(float(vals[i]), float(fv.min()))


def l1_ball_projection_bisect(u, radius, iters=200):
    """Projection onto the l1 ball by bisection on the soft-threshold level."""
    a = np.abs(u)
    if a.sum() <= radius:
        return u.copy()
    lo, hi = 0.0, float(a.max())
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(a - mid, 0.0).sum() > radius:
            lo = mid
        else:
            hi = mid
    return np.sign(u) * np.maximum(a - hi, 0.0)


def finite_difference_gradient(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g
