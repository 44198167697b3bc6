"""Linear operators, spectral estimates and SPD solves.

Every operator here is immutable after construction. Spectral summaries
(``sigma = lambda_min(M M^*)`` and ``lambda_max(M^* M)``) are computed lazily
by power iteration and cached.
"""

import math

import numpy as np
from scipy import linalg as sla

__all__ = [
    "ContractError",
    "SpectralEstimationError",
    "FactorizationError",
    "NotSurjectiveError",
    "LinearOperator",
    "DenseOperator",
    "IdentityOperator",
    "FirstDifference",
    "as_vector",
    "power_iteration",
    "lambda_max_gram",
    "lambda_min_gram_out",
    "extreme_eigenvalues",
    "SpdSystem",
    "spd_solve",
    "thomas_solve",
]

MAX_POWER_ITER = 100_000


class ContractError(ValueError):
    """A precondition of an operation was violated."""


class SpectralEstimationError(RuntimeError):
    """Power iteration hit its iteration cap.

    The best estimate reached so far is kept in ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class FactorizationError(np.linalg.LinAlgError):
    """The assembled system is not positive definite."""


class NotSurjectiveError(ValueError):
    """``M M^*`` is singular, so ``M`` is not surjective."""


def as_vector(x, dim=None, name="x"):
    """Return ``x`` as a finite 1-D float array, checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        v = v.reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise ContractError(f"{name} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ContractError(f"{name} has non-finite entries")
    return v


class LinearOperator:
    """A linear map ``M: R^cols -> R^rows`` with its adjoint.

    Subclasses implement ``_apply`` and ``_adjoint``. Spectral summaries are
    cached on first request.
    """

    kind = "abstract"

    def __init__(self, rows, cols):
        if rows < 1 or cols < 1:
            raise ContractError("operator dimensions must be positive")
        self.rows = int(rows)
        self.cols = int(cols)
        self._sigma = None
        self._opnorm_sq = None

    @property
    def shape(self):
        return (self.rows, self.cols)

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ContractError(f"apply: got shape {x.shape}, expected ({self.cols},)")
        return self._apply(x)

    def adjoint(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.rows,):
            raise ContractError(f"adjoint: got shape {y.shape}, expected ({self.rows},)")
        return self._adjoint(y)

    __call__ = apply

    def to_dense(self):
        return np.column_stack([self._apply(e) for e in np.eye(self.cols)])

    def gram_out(self):
        """Dense ``M M^*`` (rows x rows)."""
        d = self.to_dense()
        return d @ d.T

    def gram_in(self):
        """Dense ``M^* M`` (cols x cols)."""
        d = self.to_dense()
        return d.T @ d

    # spectral summaries -------------------------------------------------

    def lambda_max_gram(self, tol=1e-10):
        if self._opnorm_sq is None:
            self._opnorm_sq = lambda_max_gram(self, tol)
        return self._opnorm_sq

    def opnorm(self, tol=1e-10):
        return math.sqrt(self.lambda_max_gram(tol))

    def sigma(self, tol=1e-10):
        """``lambda_min(M M^*)``; zero (up to rounding) when not surjective."""
        if self._sigma is None:
            self._sigma = lambda_min_gram_out(self, tol)
        return self._sigma

    def lambda_min_gram_in(self, tol=1e-10):
        """``lambda_min(M^* M)``.

        Zero when ``rows < cols``; equal to ``sigma`` for square ``M`` since
        ``M M^*`` and ``M^* M`` then share their spectrum.
        """
        if self.rows < self.cols:
            return 0.0
        if self.rows == self.cols:
            return self.sigma(tol)
        return _lambda_min_sym(self.gram_in(), tol)

    @property
    def is_identity(self):
        return False


class DenseOperator(LinearOperator):
    """Multiplication by a dense matrix."""

    kind = "dense"

    def __init__(self, matrix):
        a = np.array(matrix, dtype=float, copy=True)
        if a.ndim != 2:
            raise ContractError("dense operator needs a 2-D matrix")
        if not np.all(np.isfinite(a)):
            raise ContractError("matrix has non-finite entries")
        super().__init__(*a.shape)
        a.setflags(write=False)
        self.matrix = a

    def _apply(self, x):
        return self.matrix @ x

    def _adjoint(self, y):
        return self.matrix.T @ y

    def to_dense(self):
        return self.matrix.copy()

    def __repr__(self):
        return f"DenseOperator(shape={self.shape})"


class IdentityOperator(LinearOperator):
    kind = "identity"

    def __init__(self, n):
        super().__init__(n, n)
        self._sigma = 1.0
        self._opnorm_sq = 1.0

    def _apply(self, x):
        return x.copy()

    def _adjoint(self, y):
        return y.copy()

    def to_dense(self):
        return np.eye(self.rows)

    @property
    def is_identity(self):
        return True

    def __repr__(self):
        return f"IdentityOperator({self.rows})"


class FirstDifference(LinearOperator):
    """``(D x)_i = x_{i+1} - x_i``, mapping ``R^n`` to ``R^(n-1)``.

    The eigenvalues of ``D D^*`` are ``2 - 2 cos(k pi / n)``, ``k = 1..n-1``,
    so both extremes are known in closed form.
    """

    kind = "first_difference"

    def __init__(self, n):
        if n < 2:
            raise ContractError("first difference needs n >= 2")
        super().__init__(n - 1, n)
        self.n = int(n)
        self._sigma = 2.0 * (1.0 + math.cos(math.pi - math.pi / n))
        self._opnorm_sq = 2.0 * (1.0 + math.cos(math.pi / n))

    def _apply(self, x):
        return np.diff(x)

    def _adjoint(self, y):
        out = np.empty(self.cols)
        out[0] = -y[0]
        out[1:-1] = y[:-1] - y[1:]
        out[-1] = y[-1]
        return out

    def to_dense(self):
        d = np.zeros((self.rows, self.cols))
        i = np.arange(self.rows)
        d[i, i] = -1.0
        d[i, i + 1] = 1.0
        return d

    def gram_in_bands(self):
        """Diagonal and off-diagonal of the tridiagonal ``D^* D``."""
        diag = np.full(self.n, 2.0)
        diag[0] = diag[-1] = 1.0
        return diag, np.full(self.n - 1, -1.0)

    def __repr__(self):
        return f"FirstDifference({self.n})"


# ---------------------------------------------------------------------------
# spectral estimation


def power_iteration(matvec, dim, tol=1e-10, max_iter=MAX_POWER_ITER):
    """Largest eigenvalue of a symmetric positive semidefinite map.

    Starts from the normalized all-ones vector (first basis vector when that
    lies in the null space) and stops once
    ``||B v - lam v|| <= tol * lam``.

    Returns
    -------
    lam : float
    v : ndarray
        Unit eigenvector estimate.
    """
    if tol <= 0:
        raise ContractError("tol must be positive")
    v = np.full(dim, 1.0 / math.sqrt(dim))
    w = matvec(v)
    if not np.any(w):
        v = np.zeros(dim)
        v[0] = 1.0
        w = matvec(v)
        if not np.any(w):
            return 0.0, v
    lam = float(v @ w)
    for _ in range(max_iter):
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, v
        lam = float(v @ w)
        if np.linalg.norm(w - lam * v) <= tol * abs(lam):
            return lam, v
        v = w / nw
        w = matvec(v)
    raise SpectralEstimationError(
        f"power iteration did not reach tol={tol} in {max_iter} steps", lam
    )


def _small_gram(op):
    """Dense Gram matrix on the smaller side (same nonzero spectrum)."""
    if op.rows <= op.cols:
        return op.gram_out()
    return op.gram_in()


def lambda_max_gram(op, tol=1e-10):
    """``lambda_max(M^* M)``, i.e. the squared operator norm."""
    if tol <= 0:
        raise ContractError("tol must be positive")
    if isinstance(op, (IdentityOperator, FirstDifference)):
        return op._opnorm_sq
    g = _small_gram(op)
    lam, _ = power_iteration(lambda v: g @ v, g.shape[0], tol)
    return lam


def _lambda_min_sym(g, tol):
    """Smallest eigenvalue of a PSD matrix via power iteration on a shift."""
    dim = g.shape[0]
    top, _ = power_iteration(lambda v: g @ v, dim, tol)
    shift = top * (1.0 + 1e-6)
    if shift == 0.0:
        return 0.0
    lam, _ = power_iteration(lambda v: shift * v - g @ v, dim, tol)
    return max(shift - lam, 0.0)


def lambda_min_gram_out(op, tol=1e-10):
    """``sigma = lambda_min(M M^*)``.

    Closed form for the identity and first-difference operators; power
    iteration on ``lam_bar I - M M^*`` otherwise.
    """
    if tol <= 0:
        raise ContractError("tol must be positive")
    if isinstance(op, (IdentityOperator, FirstDifference)):
        return op._sigma
    if op.rows > op.cols:
        return 0.0
    return _lambda_min_sym(op.gram_out(), tol)


def extreme_eigenvalues(q, tol=1e-10):
    """``(lambda_max, lambda_min)`` of a symmetric, possibly indefinite matrix."""
    q = np.asarray(q, dtype=float)
    dim = q.shape[0]
    rho2, _ = power_iteration(lambda v: q @ (q @ v), dim, tol)
    rho = math.sqrt(rho2) * (1.0 + 1e-6)
    if rho == 0.0:
        return 0.0, 0.0
    up, _ = power_iteration(lambda v: q @ v + rho * v, dim, tol)
    down, _ = power_iteration(lambda v: rho * v - q @ v, dim, tol)
    return up - rho, rho - down


# ---------------------------------------------------------------------------
# SPD solves


def thomas_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system by the Thomas algorithm (no pivoting).

    Reference implementation; :class:`SpdSystem` uses a banded Cholesky
    factorization for repeated solves.
    """
    n = len(diag)
    c = np.empty(n - 1)
    d = np.empty(n)
    b0 = diag[0]
    if b0 == 0.0:
        raise FactorizationError("zero pivot")
    c[:] = 0.0
    if n > 1:
        c[0] = upper[0] / b0
    d[0] = rhs[0] / b0
    for i in range(1, n):
        denom = diag[i] - lower[i - 1] * c[i - 1]
        if denom == 0.0:
            raise FactorizationError("zero pivot")
        if i < n - 1:
            c[i] = upper[i] / denom
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / denom
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


class SpdSystem:
    """Factorization of ``c I + H + beta M^* M`` for repeated solves.

    Parameters
    ----------
    M : LinearOperator
    beta : float
        Penalty weight on ``M^* M`` (may be zero).
    c : float, optional
        Multiple of the identity.
    hessian : ndarray or None
        Extra dense symmetric term ``H`` (e.g. ``A^* A``).

    The fast paths are: diagonal when ``M`` is the identity and ``H`` is
    absent; tridiagonal Cholesky for ``c I + beta D^* D``; Woodbury through
    an ``m x m`` factorization for wide dense ``M`` without ``H``. Anything
    else is assembled densely and Cholesky-factored.
    """

    def __init__(self, M, beta, c=0.0, hessian=None):
        self.M = M
        self.beta = float(beta)
        self.c = float(c)
        self.hessian = None if hessian is None else np.asarray(hessian, dtype=float)
        n = M.cols
        if self.hessian is None and M.is_identity:
            self._mode = "diagonal"
            self._scale = self.c + self.beta
            if not self._scale > 0:
                raise FactorizationError("system is not positive definite")
        elif self.hessian is None and isinstance(M, FirstDifference):
            self._mode = "tridiagonal"
            diag, off = M.gram_in_bands()
            ab = np.zeros((2, n))
            ab[0, 1:] = self.beta * off
            ab[1] = self.c + self.beta * diag
            try:
                self._factor = sla.cholesky_banded(ab, lower=False)
            except np.linalg.LinAlgError as exc:
                raise FactorizationError(str(exc)) from exc
        elif (
            self.hessian is None
            and isinstance(M, DenseOperator)
            and M.rows < M.cols
            and self.c > 0
        ):
            # (cI + b M'M)^-1 = (1/c)[I - b M' (cI + b M M')^-1 M]
            self._mode = "woodbury"
            small = self.c * np.eye(M.rows) + self.beta * (M.matrix @ M.matrix.T)
            self._factor = self._cho(small)
        else:
            self._mode = "dense"
            a = self.c * np.eye(n)
            if self.hessian is not None:
                a = a + self.hessian
            if self.beta != 0.0:
                a = a + self.beta * M.gram_in()
            self._factor = self._cho(a)

    @staticmethod
    def _cho(a):
        try:
            return sla.cho_factor(a, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError(str(exc)) from exc

    @property
    def mode(self):
        return self._mode

    def matvec(self, x):
        """Apply the assembled operator (used for residual checks)."""
        out = self.c * x + self.beta * self.M.adjoint(self.M.apply(x))
        if self.hessian is not None:
            out = out + self.hessian @ x
        return out

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if self._mode == "diagonal":
            return rhs / self._scale
        if self._mode == "tridiagonal":
            return sla.cho_solve_banded((self._factor, False), rhs, check_finite=False)
        if self._mode == "woodbury":
            a = self.M.matrix
            inner = sla.cho_solve(self._factor, a @ rhs, check_finite=False)
            return (rhs - self.beta * (a.T @ inner)) / self.c
        return sla.cho_solve(self._factor, rhs, check_finite=False)


def spd_solve(M, beta, rhs, c=0.0, hessian=None):
    """One-off solve of ``(c I + H + beta M^* M) x = rhs``."""
    rhs = as_vector(rhs, M.cols, "rhs")
    return SpdSystem(M, beta, c=c, hessian=hessian).solve(rhs)
