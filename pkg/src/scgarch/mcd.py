"""Modified Cholesky decomposition of a covariance matrix.

A symmetric positive definite matrix ``sigma`` is reparameterized as
``sigma = inv(T) @ diag(d) @ inv(T).T`` where ``T`` is unit lower
triangular and ``d`` is strictly positive.  Row ``j`` of ``T`` holds the
negated coefficients of the least-squares regression of variable ``j``
on variables ``0..j-1``, and ``d[j]`` is the corresponding prediction
error variance.  Every (T, d) pair with positive ``d`` maps back to a
positive definite matrix, which is what makes the parameterization
useful for unconstrained covariance modelling.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .exceptions import DimensionMismatch, NonPositiveDiagonal, NotPositiveDefinite

# Relative floor for the smallest eigenvalue in the PD test: scale-free,
# so well-conditioned matrices with large entries are not rejected.
PD_RTOL = 1e-12


def as_sym_matrix(sigma) -> np.ndarray:
    """Validate and return a square symmetric float matrix."""
    a = np.asarray(sigma, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise DimensionMismatch("matrix is not symmetric")
    return a


def is_positive_definite(sigma: np.ndarray, rtol: float = PD_RTOL) -> bool:
    """Scale-relative PD test: smallest eigenvalue > rtol * max diagonal."""
    lam_min = float(np.linalg.eigvalsh(sigma)[0])
    scale = float(np.max(np.diag(sigma))) if sigma.shape[0] else 0.0
    return lam_min > rtol * max(scale, 0.0)


def mcd_decompose(sigma) -> tuple[np.ndarray, np.ndarray]:
    """Decompose a PD matrix into regression coefficients and variances.

    Parameters
    ----------
    sigma : (p, p) array_like
        Symmetric positive definite matrix.

    Returns
    -------
    t : (p, p) ndarray
        Unit lower triangular; ``t[j, k] == -phi_jk`` for ``k < j`` where
        ``phi_j`` solves the normal equations
        ``sigma[:j, :j] @ phi_j = sigma[:j, j]``.
    d : (p,) ndarray
        Strictly positive prediction error variances, so that
        ``t @ sigma @ t.T == diag(d)``.

    Raises
    ------
    NotPositiveDefinite
        If ``sigma`` fails the scale-relative eigenvalue test.
    """
    a = as_sym_matrix(sigma)
    if not is_positive_definite(a):
        raise NotPositiveDefinite("matrix failed the positive definiteness test")
    p = a.shape[0]
    t = np.eye(p)
    d = np.empty(p)
    d[0] = a[0, 0]
    # Sequential solves of the leading blocks keep each row of t exactly
    # the regression of variable j on its predecessors.
    for j in range(1, p):
        phi = np.linalg.solve(a[:j, :j], a[:j, j])
        t[j, :j] = -phi
        d[j] = a[j, j] - a[j, :j] @ phi
    return t, d


def mcd_reconstruct(t, d) -> np.ndarray:
    """Rebuild the covariance matrix from its decomposition.

    Returns ``inv(t) @ diag(d) @ inv(t).T``, which is symmetric positive
    definite for any unit lower triangular ``t`` and positive ``d``.
    """
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {t.shape}")
    if d.ndim != 1 or d.shape[0] != t.shape[0]:
        raise DimensionMismatch(
            f"variance vector of length {d.shape} does not match matrix {t.shape}"
        )
    tinv = solve_triangular(t, np.eye(t.shape[0]), lower=True, unit_diagonal=True)
    sigma = (tinv * d) @ tinv.T
    return 0.5 * (sigma + sigma.T)


def cov_to_corr(sigma) -> np.ndarray:
    """Rescale a covariance matrix to a correlation matrix.

    Raises
    ------
    NonPositiveDiagonal
        If any variance on the diagonal is not strictly positive.
    """
    a = as_sym_matrix(sigma)
    v = np.diag(a)
    if np.any(v <= 0):
        raise NonPositiveDiagonal("diagonal entries must be strictly positive")
    s = 1.0 / np.sqrt(v)
    corr = a * np.outer(s, s)
    np.fill_diagonal(corr, 1.0)
    return corr
