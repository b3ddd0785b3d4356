"""Local polynomial kernel regression of order 0, 1 or 2.

The local model around a point ``x`` is

    z(x_i) ~ b0 + b1 . d + b2 . vech(d d^T),   d = x_i - x

fitted by weighted least squares.  Only ``b0`` is the estimate of ``z(x)``;
the higher coefficients are returned for inspection.

Normal matrices are tiny (at most 6x6), so they are solved directly: the
matrix is Jacobi-scaled to unit diagonal and Cholesky-factored.  A pivot
below :data:`PIVOT_TOL` marks the system as numerically singular and the fit
falls back to order 0, the weighted mean.  :func:`solve_normal_batch` is the
reference for the compiled kernels, which repeat the same operations in the
same order.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ContractError, DegenerateSystemError, ParameterError

__all__ = [
    "PIVOT_TOL",
    "SamplePoint",
    "RegressionConfig",
    "RegressionFit",
    "basis_width",
    "vech",
    "basis_row",
    "kernel_weight",
    "normal_equations",
    "solve_normal_batch",
    "wls_solve",
    "kernel_regress",
]

# Smallest admissible Cholesky pivot of the unit-diagonal normal matrix
# (condition estimate 1 / pivot > 1e12 counts as singular).
PIVOT_TOL = 1e-12

_WIDTHS = {0: 1, 1: 3, 2: 6}


def basis_width(order):
    try:
        return _WIDTHS[order]
    except KeyError:
        raise ParameterError(f"regression order must be 0, 1 or 2, got {order!r}") from None


def check_order(order):
    basis_width(order)
    return int(order)


@dataclass(frozen=True)
class SamplePoint:
    position: tuple
    value: float


@dataclass(frozen=True)
class RegressionConfig:
    order: int = 2
    smoothing: np.ndarray = field(default_factory=lambda: np.eye(2))
    ridge: float = 0.0

    def __post_init__(self):
        check_order(self.order)
        if self.ridge < 0:
            raise ParameterError("ridge must be >= 0")
        _check_spd(np.asarray(self.smoothing, dtype=np.float64))


@dataclass(frozen=True)
class RegressionFit:
    order: int
    beta: np.ndarray
    fallback: bool = False

    @property
    def value(self):
        return float(self.beta[0])


def vech(m):
    """Half-vectorize a symmetric 2x2 matrix: ``[m11, m21, m22]``."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (2, 2):
        raise ParameterError(f"vech expects a 2x2 matrix, got shape {m.shape}")
    if abs(m[0, 1] - m[1, 0]) > 1e-12:
        raise ContractError("vech input is not symmetric")
    return np.array([m[0, 0], m[1, 0], m[1, 1]])


def basis_row(offset, order):
    """Taylor basis row ``[1, d1, d2, d1^2, d1*d2, d2^2]`` truncated to ``order``."""
    width = basis_width(order)
    d1, d2 = float(offset[0]), float(offset[1])
    row = [1.0, d1, d2, d1 * d1, d1 * d2, d2 * d2]
    return np.array(row[:width])


def _check_spd(h):
    if h.shape != (2, 2):
        raise ParameterError("smoothing matrix must be 2x2")
    if abs(h[0, 1] - h[1, 0]) > 1e-12 * max(1.0, np.abs(h).max()):
        raise ParameterError("smoothing matrix must be symmetric")
    det = h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]
    if not (h[0, 0] > 0 and det > 0):
        raise ParameterError("smoothing matrix must be positive definite")
    return det


def kernel_weight(t, H):
    """Scaled bivariate Gaussian ``K(H^-1 t) / det(H)``."""
    H = np.asarray(H, dtype=np.float64)
    det = _check_spd(H)
    u = np.linalg.solve(H, np.asarray(t, dtype=np.float64))
    return float(math.exp(-0.5 * float(u @ u)) / (2.0 * math.pi * det))


def normal_equations(rows, weights):
    """Return ``(X^T W X, X^T W)`` for basis rows ``X`` and diagonal weights."""
    rows = np.asarray(rows, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    xw = rows.T * weights
    return xw @ rows, xw


def solve_normal_batch(A, g, ridge=0.0, tol=PIVOT_TOL):
    """Solve a stack of small normal systems with the order-0 fallback policy.

    ``A`` has shape ``(m, m, n)`` (only the upper triangle is read) and ``g``
    shape ``(m, n)``.  Returns ``(beta, fallback)`` with ``beta`` of shape
    ``(m, n)`` and ``fallback`` a boolean mask of systems that were treated as
    singular and answered with ``g[0] / A[0, 0]``.  Systems with
    ``A[0, 0] <= 0`` (no weight at all) get NaN and are flagged; callers
    decide how to report them.
    """
    A = np.asarray(A, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    m, n = g.shape
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = g[0] / A[0, 0]
    empty = ~(A[0, 0] > 0)
    beta = np.zeros((m, n))
    beta[0] = np.where(empty, np.nan, mean)
    if m == 1:
        return beta, empty.copy()

    bad = empty.copy()
    diag = np.empty((m, n))
    for i in range(m):
        diag[i] = A[i, i] + ridge
        bad |= ~(diag[i] > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = 1.0 / np.sqrt(np.where(bad, 1.0, diag))

    S = np.empty((m, m, n))
    for i in range(m):
        S[i, i] = s[i] * diag[i] * s[i]
        for j in range(i + 1, m):
            S[j, i] = s[i] * A[i, j] * s[j]

    L = np.zeros((m, m, n))
    for j in range(m):
        piv = S[j, j].copy()
        for k in range(j):
            piv -= L[j, k] * L[j, k]
        bad |= ~(piv > tol)
        L[j, j] = np.sqrt(np.where(bad, 1.0, piv))
        for i in range(j + 1, m):
            acc = S[i, j].copy()
            for k in range(j):
                acc -= L[i, k] * L[j, k]
            L[i, j] = acc / L[j, j]

    u = np.empty((m, n))
    for i in range(m):
        acc = s[i] * g[i]
        for k in range(i):
            acc = acc - L[i, k] * u[k]
        u[i] = acc / L[i, i]
    v = np.empty((m, n))
    for i in range(m - 1, -1, -1):
        acc = u[i].copy()
        for k in range(i + 1, m):
            acc -= L[k, i] * v[k]
        v[i] = acc / L[i, i]

    full = s * v
    beta = np.where(bad, 0.0, full)
    beta[0] = np.where(bad, np.where(empty, np.nan, mean), full[0])
    return beta, bad


def wls_solve(rows, weights, values, ridge=0.0):
    """Minimize ``||y - X b||_W^2 + ridge * ||b||^2`` for one sample set.

    A numerically singular system (condition estimate above ``1 / PIVOT_TOL``)
    is answered with the weighted mean and ``fallback=True``.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64).ravel()
    values = np.asarray(values, dtype=np.float64).ravel()
    if weights.size == 0 or rows.shape[0] == 0:
        raise ParameterError("wls_solve needs at least one sample")
    if not (rows.shape[0] == weights.size == values.size):
        raise ParameterError("rows, weights and values disagree in length")
    width = rows.shape[1]
    order = {1: 0, 3: 1, 6: 2}.get(width)
    if order is None:
        raise ParameterError(f"basis rows must have width 1, 3 or 6, got {width}")
    if np.any(weights < 0):
        raise ParameterError("weights must be nonnegative")
    if ridge < 0:
        raise ParameterError("ridge must be >= 0")
    if not np.any(weights > 0):
        raise DegenerateSystemError("all weights are zero")
    A, xw = normal_equations(rows, weights)
    g = xw @ values
    beta, bad = solve_normal_batch(A[:, :, None], g[:, None], ridge)
    return RegressionFit(order, beta[:, 0], bool(bad[0]))


def kernel_regress(samples, x, cfg):
    """Estimate ``z(x)`` from scattered samples with the Gaussian kernel ``K_H``."""
    if len(samples) == 0:
        raise ParameterError("kernel_regress needs at least one sample")
    x = np.asarray(x, dtype=np.float64)
    rows, weights, values = [], [], []
    for s in samples:
        d = np.asarray(s.position, dtype=np.float64) - x
        rows.append(basis_row(d, cfg.order))
        weights.append(kernel_weight(d, cfg.smoothing))
        values.append(s.value)
    return wls_solve(rows, weights, values, cfg.ridge).value
