"""Matrix-free spectral norms of deviations from the expected matrix."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .. import _rng
from ..exceptions import ConvergenceError, DegenerateInputError, ParameterError
from ..graph import ExpectedMatrix, Graph

__all__ = ["operator_norm", "spectral_norm_diff", "normalized_laplacian_diff", "as_operator"]


def operator_norm(matvec, size, tol=1e-6, max_iter=20000, seed=0):
    """Spectral norm of a symmetric operator by power iteration.

    The estimate ``||M x_k||`` for the normalized iterate ``x_k`` is
    non-decreasing; iteration stops once its relative change drops to
    ``tol``.
    """
    rng = _rng.stream(seed, _rng.NORM_START)
    x = rng.standard_normal(size)
    x /= np.linalg.norm(x)
    prev = -1.0
    change = math.inf
    for it in range(1, max_iter + 1):
        y = matvec(x)
        est = float(np.linalg.norm(y))
        if est == 0.0:
            return 0.0
        change = abs(est - prev) / est
        if change <= tol:
            return est
        prev = est
        x = y / est
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} in {max_iter} iterations",
        best_residual=change,
        iterations=max_iter,
    )


def as_operator(M):
    """``(matvec, size)`` for a graph, ExpectedMatrix, sparse or dense matrix."""
    if isinstance(M, Graph):
        A = M.adjacency
        return (lambda x: A @ x), M.num_nodes
    if isinstance(M, ExpectedMatrix):
        return M.matvec, M.num_nodes
    if sp.issparse(M):
        M = sp.csr_matrix(M, dtype=np.float64)
    else:
        M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError(f"operator must be square, got shape {M.shape}")
    return (lambda x: M @ x), M.shape[0]


def _row_sums(M):
    if isinstance(M, Graph):
        return M.degrees.astype(np.float64)
    if isinstance(M, ExpectedMatrix):
        return np.full(M.num_nodes, M.d)
    return np.asarray(M.sum(axis=1), dtype=np.float64).ravel()


def spectral_norm_diff(g, B, tol=1e-6, max_iter=20000, seed=0):
    """``||A - B||`` with ``A`` the adjacency of ``g`` (or any square matrix)."""
    fa, na = as_operator(g)
    fb, nb = as_operator(B)
    if na != nb:
        raise ParameterError(f"size mismatch: {na} vs {nb}")
    return operator_norm(lambda x: fa(x) - fb(x), na, tol, max_iter, seed)


def normalized_laplacian_diff(g, B, d=None, tol=1e-6, max_iter=20000, seed=0):
    """``||d N - B||`` with ``N = D^-1/2 A D^-1/2`` and ``d`` the nominal degree.

    ``d`` defaults to ``B.d`` for an :class:`ExpectedMatrix`, else to the mean
    row sum of ``B``.
    """
    fa, na = as_operator(g)
    fb, nb = as_operator(B)
    if na != nb:
        raise ParameterError(f"size mismatch: {na} vs {nb}")
    deg = _row_sums(g)
    if np.any(deg <= 0):
        raise DegenerateInputError("all degrees must be positive")
    if d is None:
        d = B.d if isinstance(B, ExpectedMatrix) else float(_row_sums(B).mean())
    inv_s = 1.0 / np.sqrt(deg)
    return operator_norm(lambda x: d * inv_s * fa(inv_s * x) - fb(x), na, tol, max_iter, seed)
