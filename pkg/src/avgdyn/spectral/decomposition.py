"""Decomposition of ``P^t x`` along ``1`` and ``chi``, eigenvector alignment,
round bounds and degree-deviation sums."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..dynamics import averaging_step
from ..exceptions import BoundOverflowError, DegenerateInputError, ParameterError
from ..graph import partition_vector

__all__ = [
    "DecompositionReport",
    "AlignmentReport",
    "DegreeDeviation",
    "second_eigenvector",
    "decomposition_report",
    "alignment_report",
    "round_bound",
    "ROUND_BOUND_CAP",
    "degree_deviation_stats",
]

ROUND_BOUND_CAP = 10**9
TIE_TOL = 1e-8


def second_eigenvector(g, spectrum, tie_tol=TIE_TOL):
    """Unit ``w2`` oriented so that ``<D^1/2 chi, w2> >= 0``.

    When ``lambda2`` is repeated among the computed eigenvalues,
    ``D^1/2 chi`` is projected onto that eigenspace instead of picking an
    arbitrary basis vector.  Returns ``(w2, degenerate)``.
    """
    chi = partition_vector(g)
    u = np.sqrt(g.degrees.astype(np.float64)) * chi
    vals = np.asarray(spectrum.eigenvalues)
    lam2 = vals[1]
    tied = np.flatnonzero(np.abs(vals[1:] - lam2) <= tie_tol * max(1.0, abs(lam2))) + 1
    if tied.size > 1:
        W = spectrum.eigenvectors[:, tied]
        w = W @ (W.T @ u)
        nrm = np.linalg.norm(w)
        if nrm < 1e-12:
            raise DegenerateInputError("D^1/2 chi is orthogonal to the lambda2 eigenspace")
        return w / nrm, True
    w = np.array(spectrum.eigenvectors[:, 1], dtype=np.float64)
    if u @ w < 0:
        w = -w
    return w, False


@dataclass
class DecompositionReport:
    """``x^(t) = alpha1 1 + alpha2 lambda2^t (chi + z) + e^(t)``.

    ``residual_l2[t]`` and ``residual_inf[t]`` measure ``e^(t)`` for
    ``t = 0..rounds``; ``residual_chi_inf[t]`` measures
    ``x^(t) - alpha1 1 - alpha2 lambda2^t chi`` (the regular-graph form, where
    ``z = 0``).
    """

    alpha1: float
    alpha2: float
    beta2: float
    nu: float
    lambda2: float
    lambda3: float
    lam: float
    x_norm: float
    z: np.ndarray = field(repr=False)
    residual_l2: np.ndarray = field(repr=False)
    residual_inf: np.ndarray = field(repr=False)
    residual_chi_inf: np.ndarray = field(repr=False)
    degenerate: bool = False

    @property
    def z_norm(self):
        return float(np.linalg.norm(self.z))

    @property
    def rounds(self):
        return len(self.residual_l2) - 1

    def e_norm_bound(self, t):
        """``4 lambda^t ||x||``."""
        return 4.0 * self.lam**t * self.x_norm

    def regular_inf_bound(self, t):
        """``lambda^t sqrt(2n)`` (the bound for regular graphs and +-1 starts)."""
        return self.lam**t * math.sqrt(self.z.size)

    def z_norm_bound(self, gamma):
        """``88 gamma sqrt(2n) / (nu - lambda3)``."""
        return 88.0 * gamma * math.sqrt(self.z.size) / (self.nu - self.lambda3)

    def premises_hold(self, gamma):
        return gamma <= 0.1 and self.lam < self.nu

    def bound_holds(self, slack=1e-8):
        ts = np.arange(self.rounds + 1)
        return bool(np.all(self.residual_l2 <= 4.0 * self.lam**ts * self.x_norm + slack))


def decomposition_report(g, x0, profile, spectrum, T):
    """Coefficients ``alpha1, alpha2, beta2``, the vector ``z`` and residuals up to round ``T``.

    ``alpha1 = 1^T D x / ||D^1/2 1||^2``, ``alpha2 = w2^T D^1/2 x / beta2`` with
    ``beta2 = chi^T D^1/2 w2`` and ``z = beta2 D^-1/2 w2 - chi``.
    """
    from .eigen import lambda_stats

    chi = partition_vector(g)
    x = np.asarray(x0, dtype=np.float64)
    if x.shape != (g.num_nodes,):
        raise ParameterError(f"x0 must have shape ({g.num_nodes},)")
    deg = g.degrees.astype(np.float64)
    s = np.sqrt(deg)
    w2, degenerate = second_eigenvector(g, spectrum)
    beta2 = float(chi @ (s * w2))
    if abs(beta2) < 1e-12:
        raise DegenerateInputError(f"|beta2| = {abs(beta2):.3g}: w2 orthogonal to D^1/2 chi")
    alpha1 = float(deg @ x / deg.sum())
    alpha2 = float(w2 @ (s * x) / beta2)
    z = beta2 * w2 / s - chi
    stats = lambda_stats(spectrum, 2)
    lam2 = float(spectrum.eigenvalues[1])

    T = int(T)
    res_l2 = np.empty(T + 1)
    res_inf = np.empty(T + 1)
    res_chi = np.empty(T + 1)
    xt = x.copy()
    for t in range(T + 1):
        if t:
            xt = averaging_step(g, xt)
        base = alpha1 + alpha2 * lam2**t * chi
        e = xt - base - alpha2 * lam2**t * z
        res_l2[t] = np.linalg.norm(e)
        res_inf[t] = np.abs(e).max()
        res_chi[t] = np.abs(xt - base).max()
    return DecompositionReport(
        alpha1=alpha1,
        alpha2=alpha2,
        beta2=beta2,
        nu=profile.nu,
        lambda2=lam2,
        lambda3=stats.lambda3,
        lam=stats.lam,
        x_norm=float(np.linalg.norm(x)),
        z=z,
        residual_l2=res_l2,
        residual_inf=res_inf,
        residual_chi_inf=res_chi,
        degenerate=degenerate,
    )


@dataclass
class AlignmentReport:
    """Entry-wise comparison of ``sqrt(2nd) D^-1/2 w2`` with ``chi``."""

    misaligned_set: list
    entry_errors: np.ndarray = field(repr=False)
    max_entry_error: float
    sign_error_count: int
    threshold: float
    d_nominal: float
    degenerate: bool = False

    @property
    def size(self):
        return len(self.misaligned_set)


def alignment_report(g, spectrum, d=None, threshold=0.01):
    """Nodes ``i`` with ``|sqrt(2nd) (D^-1/2 w2)(i) - chi(i)| > threshold``.

    ``d`` is the nominal degree (the mean degree when omitted).  Sign errors
    compare ``sign(v2)`` with ``chi`` up to a global flip.
    """
    chi = partition_vector(g)
    deg = g.degrees.astype(np.float64)
    if d is None:
        d = float(deg.mean())
    w2, degenerate = second_eigenvector(g, spectrum)
    v2 = w2 / np.sqrt(deg)
    scaled = math.sqrt(g.num_nodes * d) * v2
    err = np.abs(scaled - chi)
    S = np.flatnonzero(err > threshold).tolist()
    wrong = int(np.count_nonzero(np.sign(v2) != chi))
    wrong = min(wrong, g.num_nodes - wrong)
    return AlignmentReport(S, err, float(err.max()), wrong, threshold, float(d), degenerate)


def round_bound(alpha2, lambda2, lam, n):
    """``ceil(1 + log(16 sqrt(2n) / (|alpha2| (1 - lambda2))) / log(lambda2 / lambda))``."""
    if alpha2 == 0:
        raise ParameterError("alpha2 must be non-zero")
    if not 0 < lambda2 < 1:
        raise ParameterError(f"need 0 < lambda2 < 1, got {lambda2}")
    if lam < 0 or lam >= lambda2:
        raise ParameterError(f"need 0 <= lambda < lambda2, got lambda={lam}, lambda2={lambda2}")
    if lam == 0:
        return 1
    num = math.log(16.0 * math.sqrt(2.0 * n) / (abs(alpha2) * (1.0 - lambda2)))
    den = math.log(lambda2 / lam)
    val = 1.0 + num / den
    if not math.isfinite(val) or val > ROUND_BOUND_CAP:
        raise BoundOverflowError(f"round bound {val:.3g} exceeds cap {ROUND_BOUND_CAP}")
    # guard against 7.000000000000001 style rounding before the ceiling
    return max(1, math.ceil(val - 1e-9))


class DegreeDeviation(NamedTuple):
    sqrt_sum: float
    square_sum: float


def degree_deviation_stats(g, d_nominal):
    """``(sum (sqrt d_i - sqrt d)^2, sum (d_i - d)^2)`` over all nodes."""
    if not d_nominal > 0:
        raise ParameterError(f"d_nominal must be positive, got {d_nominal}")
    deg = g.degrees.astype(np.float64)
    return DegreeDeviation(
        float(np.sum((np.sqrt(deg) - math.sqrt(d_nominal)) ** 2)),
        float(np.sum((deg - d_nominal) ** 2)),
    )
