"""The Averaging protocol: Rademacher start, synchronous averaging, coloring.

Each round every node replaces its value by the multiplicity-weighted mean of
its neighbors' values (``x <- P x`` with ``P = D^-1 A``) and colors itself
blue when its value did not decrease, red otherwise.

The engine tracks ``x = mu 1 + scale * y`` where ``mu = <d, x> / sum(d)`` is
conserved by the dynamics and ``y`` is kept degree-orthogonal to ``1`` and
rescaled by powers of two each round.  In exact arithmetic this is the same
sequence ``P^t x``; in floating point it keeps the round-to-round differences
(which decay like ``lambda_2^t``) at full relative precision long after they
drop below the resolution of ``mu``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _rng
from .exceptions import ParameterError

__all__ = [
    "NodeType",
    "DynamicsTrajectory",
    "SignatureTable",
    "rademacher_init",
    "averaging_step",
    "color_round",
    "run_protocol",
    "default_burn_in",
    "classify_types",
    "signature_run",
    "write_trajectory_csv",
    "write_colorings_csv",
]

BLUE, RED = "B", "R"


class NodeType(IntEnum):
    NEGATIVE = -1
    UNDETERMINED = 0
    POSITIVE = 1


def rademacher_init(num_nodes, seed):
    """I.i.d. uniform +-1 values from the seeded Rademacher stream."""
    if num_nodes < 1:
        raise ParameterError(f"num_nodes must be >= 1, got {num_nodes}")
    rng = _rng.stream(seed, _rng.RADEMACHER)
    return rng.integers(0, 2, size=int(num_nodes)).astype(np.float64) * 2.0 - 1.0


def averaging_step(g, x):
    """One synchronous round: ``out(v) = sum_u m(v,u) x(u) / d_v``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != g.num_nodes:
        raise ParameterError(f"vector length {x.shape[0]} != num_nodes {g.num_nodes}")
    g.require_no_isolated()
    deg = g.degrees if x.ndim == 1 else g.degrees[:, None]
    return (g.adjacency @ x) / deg


def color_round(x_prev, x_cur):
    """Blue (True) iff the value did not decrease; ties go blue."""
    return np.asarray(x_cur) >= np.asarray(x_prev)


@dataclass
class DynamicsTrajectory:
    """Record of one protocol run.

    ``values`` maps retained rounds to ``x^(t)``; ``diff_signs[t-1]`` is the sign
    of ``x^(t) - x^(t-1)`` (int8) for ``t = 1..rounds``, from which
    ``colorings`` (True = blue) derive.
    """

    rounds: int
    values: dict
    diff_signs: np.ndarray
    init_seed: int | None
    mean: float
    degrees: np.ndarray = field(repr=False)

    @property
    def colorings(self):
        """``(rounds, N)`` bool array; row ``t-1`` is the coloring of round ``t``."""
        return self.diff_signs >= 0

    def coloring(self, t):
        if not 1 <= t <= self.rounds:
            raise ParameterError(f"round {t} outside 1..{self.rounds}")
        return self.diff_signs[t - 1] >= 0

    @property
    def x0(self):
        return self.values[0]

    @property
    def last(self):
        return self.values[self.rounds]


def run_protocol(g, T_max, seed=None, checkpoint_policy="last", x0=None):
    """Run ``T_max`` rounds from a Rademacher start (or from ``x0``).

    ``checkpoint_policy`` is ``"last"`` (keep ``x^(0)``, ``x^(T-1)``,
    ``x^(T)``), ``"all"``, or an iterable of rounds to keep in addition.
    """
    T_max = int(T_max)
    if T_max < 1:
        raise ParameterError(f"T_max must be >= 1, got {T_max}")
    g.require_no_isolated()
    N = g.num_nodes
    if x0 is None:
        if seed is None:
            raise ParameterError("either seed or x0 is required")
        x0 = rademacher_init(N, seed)
    x0 = np.array(x0, dtype=np.float64)
    if x0.shape != (N,):
        raise ParameterError(f"x0 must have shape ({N},), got {x0.shape}")

    if checkpoint_policy == "all":
        keep = set(range(T_max + 1))
    elif checkpoint_policy == "last":
        keep = set()
    else:
        keep = {int(t) for t in checkpoint_policy}
    keep |= {0, T_max - 1, T_max}

    A = g.adjacency
    deg = g.degrees.astype(np.float64)
    total = deg.sum()
    mu = float(deg @ x0) / total
    y = x0 - mu
    y -= (deg @ y) / total
    scale = 1.0
    y, scale = _renormalize(y, scale)

    values = {0: x0.copy()}
    signs = np.empty((T_max, N), dtype=np.int8)
    for t in range(1, T_max + 1):
        y_new = (A @ y) / deg
        y_new -= (deg @ y_new) / total
        signs[t - 1] = np.sign(y_new - y)
        y, scale = _renormalize(y_new, scale)
        if t in keep:
            values[t] = mu + scale * y
    return DynamicsTrajectory(
        rounds=T_max,
        values=values,
        diff_signs=signs,
        init_seed=None if seed is None else int(seed),
        mean=mu,
        degrees=g.degrees,
    )


def _renormalize(y, scale):
    m = np.max(np.abs(y)) if y.size else 0.0
    if m == 0.0 or not np.isfinite(m):
        return y, scale
    _, e = math.frexp(m)
    return np.ldexp(y, -e), math.ldexp(scale, e)


# -- types and signatures ---------------------------------------------------

def default_burn_in(num_nodes, lambda2=None, lam=None):
    """Burn-in round ``T`` for type classification.

    With spectral data, ``ceil(2 ln N / ln(lambda2 / lambda))`` (the round
    after which ``lambda2^t`` dominates ``N^2 lambda^t``); otherwise
    ``ceil(10 ln N)``.
    """
    N = max(int(num_nodes), 2)
    if lambda2 is not None and lam is not None and 0 < lam < lambda2:
        return max(1, math.ceil(2 * math.log(N) / math.log(lambda2 / lam)))
    return max(1, math.ceil(10 * math.log(N)))


def classify_types(trajectory, T, W=10):
    """Per-node monotonicity type over the window ``t in [T, T+W)``.

    Positive if ``x^(t+1)(v) > x^(t)(v)`` throughout the window, negative if
    strictly decreasing throughout, undetermined otherwise.
    """
    T, W = int(T), int(W)
    if T < 0 or W < 1:
        raise ParameterError(f"need T >= 0 and W >= 1, got T={T}, W={W}")
    if T + W > trajectory.rounds:
        raise ParameterError(
            f"window [{T}, {T + W}) exceeds the {trajectory.rounds}-round trajectory"
        )
    # sign of x^(t+1) - x^(t) lives in row t
    window = trajectory.diff_signs[T:T + W]
    out = np.full(window.shape[1], NodeType.UNDETERMINED, dtype=np.int8)
    out[np.all(window > 0, axis=0)] = NodeType.POSITIVE
    out[np.all(window < 0, axis=0)] = NodeType.NEGATIVE
    return out


@dataclass
class SignatureTable:
    """Types of every node in each of ``ell`` independent runs."""

    ell: int
    types: np.ndarray  # (N, ell) int8 of NodeType values
    T: int
    W: int
    run_seeds: list
    labels: np.ndarray  # induced clustering
    assigned: np.ndarray  # False for nodes with an undetermined entry

    @property
    def num_undetermined(self):
        return int(np.count_nonzero(self.types == NodeType.UNDETERMINED))

    @property
    def num_groups(self):
        return int(np.unique(self.labels[self.assigned]).size)


def _group_signatures(types):
    N = types.shape[0]
    assigned = np.all(types != NodeType.UNDETERMINED, axis=1)
    labels = np.empty(N, dtype=np.int64)
    seen = {}
    for v in range(N):
        if assigned[v]:
            key = types[v].tobytes()
            labels[v] = seen.setdefault(key, len(seen))
    nxt = len(seen)
    for v in np.flatnonzero(~assigned):
        labels[v] = nxt
        nxt += 1
    return labels, assigned


def signature_run(g, ell, T=None, W=10, T_max=None, seed=0, spectrum=None):
    """``ell`` independent protocol runs and the clustering by signature.

    Run ``r`` is seeded with ``derive_seed(seed, SIGNATURE_RUN, r)``.  ``T``
    defaults to :func:`default_burn_in` (using ``spectrum`` when given, a
    ``(lambda_k, lambda)`` pair) and ``T_max`` to ``T + W``.  Nodes sharing the
    same tuple of types form one group; nodes with any undetermined type get
    singleton labels and ``assigned = False``.
    """
    ell = int(ell)
    if ell < 1:
        raise ParameterError(f"ell must be >= 1, got {ell}")
    if T is None:
        lam2, lam = spectrum if spectrum is not None else (None, None)
        T = default_burn_in(g.num_nodes, lam2, lam)
    T, W = int(T), int(W)
    if T_max is None:
        T_max = T + W
    run_seeds = [_rng.derive_seed(seed, _rng.SIGNATURE_RUN, r) for r in range(ell)]
    types = np.empty((g.num_nodes, ell), dtype=np.int8)
    for r, s in enumerate(run_seeds):
        traj = run_protocol(g, T_max, seed=s)
        types[:, r] = classify_types(traj, T, W)
    labels, assigned = _group_signatures(types)
    return SignatureTable(ell, types, T, W, run_seeds, labels, assigned)


# -- export -----------------------------------------------------------------

def _fmt(x):
    return f"{x:.17g}"


def write_trajectory_csv(trajectory, fh, include_values=True):
    """Rows ``round,node,value,color`` for rounds ``1..T``.

    ``value`` is empty for rounds that were not retained.
    """
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(["round", "node", "value", "color"] if include_values else ["round", "node", "color"])
    cols = trajectory.colorings
    for t in range(1, trajectory.rounds + 1):
        vals = trajectory.values.get(t) if include_values else None
        for v, blue in enumerate(cols[t - 1]):
            color = BLUE if blue else RED
            if include_values:
                w.writerow([t, v, "" if vals is None else _fmt(vals[v]), color])
            else:
                w.writerow([t, v, color])


def write_colorings_csv(trajectory, fh):
    """One row per round: ``round,colors`` with colors as a string of B/R."""
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(["round", "colors"])
    for t, row in enumerate(trajectory.colorings, start=1):
        w.writerow([t, "".join(BLUE if c else RED for c in row)])
