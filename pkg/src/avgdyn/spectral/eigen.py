"""Eigensolvers for the normalized adjacency ``N = D^-1/2 A D^-1/2``.

``N`` is symmetric with the same eigenvalues as ``P = D^-1 A``; ``w`` is an
eigenvector of ``N`` iff ``D^-1/2 w`` is a right eigenvector of ``P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as la

from .. import _rng
from ..exceptions import (
    ConvergenceError,
    InsufficientSpectrumError,
    ParameterError,
    SizeError,
)

__all__ = [
    "DENSE_CAP",
    "SpectrumReport",
    "LambdaStats",
    "eigensolve_dense",
    "eigensolve_topm",
    "eigensolve",
    "lambda_stats",
]

DENSE_CAP = 2000


@dataclass
class SpectrumReport:
    """Eigenpairs of ``N``.

    ``eigenvalues`` are descending (the full spectrum for the dense path, the
    top ``m`` for the iterative one) with matching columns of
    ``eigenvectors``; the most negative pair is kept separately.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    min_eigenvalue: float
    min_eigenvector: np.ndarray = field(repr=False)
    method: str
    residuals: np.ndarray
    min_residual: float
    iterations: int = 0
    num_communities: int = 2

    @property
    def full(self):
        return self.method == "dense"

    @property
    def lambda2(self):
        return float(self.eigenvalues[1])

    @property
    def lam(self):
        """Largest absolute eigenvalue beyond the first ``k``."""
        return lambda_stats(self, self.num_communities).lam

    @property
    def gap_ratio(self):
        return lambda_stats(self, self.num_communities).gap_ratio

    @property
    def w2(self):
        return self.eigenvectors[:, 1]

    def to_dict(self, include_vectors=False):
        out = {
            "method": self.method,
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "min_eigenvalue": float(self.min_eigenvalue),
            "residuals": [float(r) for r in self.residuals],
            "min_residual": float(self.min_residual),
            "iterations": int(self.iterations),
            "num_communities": int(self.num_communities),
        }
        try:
            st = lambda_stats(self, self.num_communities)
            out.update(lambda2=st.lambda2, lambda3=st.lambda3, lam=st.lam, gap_ratio=st.gap_ratio)
        except InsufficientSpectrumError:
            pass
        if include_vectors:
            out["w2"] = [float(v) for v in self.w2]
        return out


class LambdaStats(NamedTuple):
    lambda2: float
    lambda3: float
    lam: float
    gap_ratio: float


def _sqrt_degrees(g):
    g.require_no_isolated()
    return np.sqrt(g.degrees.astype(np.float64))


def eigensolve_dense(g, k=2):
    """Full spectrum of ``N`` by a dense symmetric eigensolver."""
    N = g.num_nodes
    if N > DENSE_CAP:
        raise SizeError(f"dense eigensolver capped at {DENSE_CAP} nodes, got {N}")
    s = _sqrt_degrees(g)
    M = g.adjacency.toarray() / np.outer(s, s)
    vals, vecs = la.eigh(M)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    res = np.linalg.norm(M @ vecs - vecs * vals, axis=0)
    return SpectrumReport(
        eigenvalues=vals,
        eigenvectors=vecs,
        min_eigenvalue=float(vals[-1]),
        min_eigenvector=vecs[:, -1],
        method="dense",
        residuals=res,
        min_residual=float(res[-1]),
        iterations=0,
        num_communities=k,
    )


def _chebyshev_filter(apply_N, X, degree, cut, sign, project):
    """Apply ``T_degree`` of ``sign*N`` mapped so that ``[-1, cut]`` is damped."""
    e = (cut + 1.0) / 2.0
    c = (cut - 1.0) / 2.0

    def op(Z):
        return project(sign * apply_N(Z))

    Y = (op(X) - c * X) / e
    for _ in range(1, degree):
        Y_new = 2.0 * (op(Y) - c * Y) / e - X
        X, Y = Y, Y_new
    return Y


def _subspace_iteration(apply_N, N, want, block, sign, deflate, tol, max_iter, degree, rng):
    """Block power iteration with Rayleigh-Ritz for the ``want`` eigenpairs of
    ``N`` extreme in the ``sign`` direction.

    Each sweep applies a degree-``degree`` Chebyshev polynomial in ``N`` that
    damps the unwanted end of the spectrum (below the smallest Ritz value of
    the block), followed by orthonormalization and Rayleigh-Ritz.  Iterates are
    explicitly orthogonalized against the columns of ``deflate``.  Returns
    ``(values, vectors, residuals, sweeps, matvecs)``.
    """
    def project(Z):
        if deflate is not None:
            Z = Z - deflate @ (deflate.T @ Z)
        return Z

    Q, _ = la.qr(project(rng.standard_normal((N, block))), mode="economic")
    best = math.inf
    matvecs = 0
    for it in range(1, max_iter + 1):
        NQ = apply_N(Q)
        matvecs += 1
        H = Q.T @ NQ
        H = (H + H.T) / 2
        theta, U = la.eigh(H)
        order = np.argsort(-sign * theta)
        theta, U = theta[order], U[:, order]
        Q, NQ = Q @ U, NQ @ U
        res = np.linalg.norm(NQ[:, :want] - Q[:, :want] * theta[:want], axis=0)
        worst = float(res.max()) if want else 0.0
        best = min(best, worst)
        if worst <= tol:
            return theta[:want], Q[:, :want], res, it, matvecs
        cut = float(sign * theta[-1])
        if block > want and degree > 1 and -1.0 < cut < float(sign * theta[want - 1]):
            Z = _chebyshev_filter(apply_N, Q, degree, cut, sign, project)
            matvecs += degree
        else:
            Z = project((Q + sign * NQ) / 2)
        Q, _ = la.qr(project(Z), mode="economic")
    raise ConvergenceError(
        f"subspace iteration did not reach tol={tol} in {max_iter} sweeps",
        best_residual=best,
        iterations=max_iter,
    )


def eigensolve_topm(g, m, tol=1e-8, max_iter=5000, oversample=8, degree=8, seed=0, k=2):
    """Top ``m`` eigenpairs of ``N`` plus the most negative one.

    ``w1 = D^1/2 1 / ||D^1/2 1||`` is taken in closed form; the rest of the top
    block comes from Chebyshev-filtered block power iteration on ``N``
    deflated against ``w1``, and the bottom pair from the same iteration on
    ``-N``.  All residuals ``||N w - lambda w||`` are at most ``tol``.
    ``max_iter`` bounds the filter sweeps; ``degree=1`` falls back to plain
    block power iteration on ``(I + N)/2``.  ``iterations`` in the report
    counts block applications of ``N``.
    """
    m = int(m)
    if m < 2:
        raise ParameterError(f"m must be >= 2, got {m}")
    N = g.num_nodes
    if m > N:
        raise ParameterError(f"m={m} exceeds the number of nodes {N}")
    s = _sqrt_degrees(g)
    A = g.adjacency

    def apply_N(X):
        return (A @ (X / s[:, None])) / s[:, None]

    w1 = s / np.linalg.norm(s)
    w1_res = float(np.linalg.norm(apply_N(w1[:, None])[:, 0] - w1))
    rng = _rng.stream(seed, _rng.EIGEN_START)

    want = m - 1
    block = min(want + oversample, N - 1)
    theta, W, res, _, mv_top = _subspace_iteration(
        apply_N, N, want, block, +1.0, w1[:, None], tol, max_iter, degree, rng
    )
    mblock = min(1 + oversample, N)
    mtheta, mW, mres, _, mv_min = _subspace_iteration(
        apply_N, N, 1, mblock, -1.0, None, tol, max_iter, degree, rng
    )
    vals = np.concatenate([[1.0], theta])
    vecs = np.column_stack([w1, W])
    return SpectrumReport(
        eigenvalues=vals,
        eigenvectors=vecs,
        min_eigenvalue=float(mtheta[0]),
        min_eigenvector=mW[:, 0],
        method="iterative",
        residuals=np.concatenate([[w1_res], res[:want]]),
        min_residual=float(mres[0]),
        iterations=int(mv_top + mv_min),
        num_communities=k,
    )


def eigensolve(g, m=None, k=2, **kwargs):
    """Dense up to :data:`DENSE_CAP` nodes, iterative beyond (``m`` defaults to ``k + 2``)."""
    if g.num_nodes <= DENSE_CAP:
        return eigensolve_dense(g, k=k)
    return eigensolve_topm(g, m if m is not None else k + 2, k=k, **kwargs)


def lambda_stats(report, k=2):
    """``(lambda2, lambda3, lambda, gap_ratio)``.

    ``lambda = max(|lambda_{k+1}|, |lambda_min|)`` and ``gap_ratio =
    lambda_k / lambda`` (``inf`` when ``lambda = 0``).
    """
    k = int(k)
    vals = np.asarray(report.eigenvalues)
    if vals.size < k + 1:
        raise InsufficientSpectrumError(
            f"need at least {k + 1} top eigenvalues for k={k}, report has {vals.size}"
        )
    lam2 = float(vals[1])
    lam3 = float(vals[2])
    lam = max(abs(float(vals[k])), abs(float(report.min_eigenvalue)))
    top = float(vals[k - 1])
    gap = math.inf if lam == 0 else top / lam
    return LambdaStats(lam2, lam3, lam, gap)
