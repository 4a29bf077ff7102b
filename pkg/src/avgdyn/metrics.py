"""Reconstruction quality, convergence detection and Rademacher checks."""

from __future__ import annotations

import csv
import itertools
import math
import statistics
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from . import _rng
from .exceptions import ParameterError

__all__ = [
    "MAX_K",
    "Reconstruction",
    "ReconstructionReport",
    "agreement",
    "classify_reconstruction",
    "convergence_round",
    "reconstruction_report",
    "same_partition",
    "rademacher_projection_test",
    "sweep_summary",
    "write_summary_csv",
]

MAX_K = 8


class Reconstruction(str, Enum):
    STRONG = "strong"
    EPS_WEAK = "eps-weak"
    FAIL = "fail"


@lru_cache(maxsize=None)
def _permutations(k):
    return np.array(list(itertools.permutations(range(k))), dtype=np.int64)


def _encode(labels):
    arr = np.asarray(labels)
    alphabet, codes = np.unique(arr, return_inverse=True)
    return alphabet, codes.ravel()


def agreement(colors, truth, k=2):
    """Best matched fraction over all maps from color labels to truth labels.

    Color labels are ranked in sorted order (``False < True``, ``"B" <
    "R"``); the returned permutation maps rank ``i`` to truth label
    ``perm[i]``.  Ties resolve to the lexicographically smallest permutation.
    """
    k = int(k)
    if k > MAX_K:
        raise ParameterError(f"exhaustive matching supports k <= {MAX_K}, got {k}")
    if k < 1:
        raise ParameterError(f"k must be positive, got {k}")
    alphabet, c = _encode(colors)
    t = np.asarray(truth, dtype=np.int64).ravel()
    if c.size != t.size:
        raise ParameterError(f"length mismatch: {c.size} colors vs {t.size} truth labels")
    if alphabet.size > k:
        raise ParameterError(f"{alphabet.size} distinct colors exceed k={k}")
    if t.size and (t.min() < 0 or t.max() >= k):
        raise ParameterError(f"truth labels must lie in 0..{k - 1}")
    if c.size == 0:
        return 1.0, tuple(range(k))
    conf = np.zeros((k, k), dtype=np.int64)
    np.add.at(conf, (c, t), 1)
    perms = _permutations(k)
    scores = conf[np.arange(k), perms].sum(axis=1)
    best = int(np.argmax(scores))
    return float(scores[best]) / c.size, tuple(int(p) for p in perms[best])


def classify_reconstruction(fraction, n_total, eps):
    if not 0.0 <= fraction <= 1.0:
        raise ParameterError(f"fraction must lie in [0, 1], got {fraction}")
    misclassified = round((1.0 - fraction) * n_total)
    if misclassified == 0:
        return Reconstruction.STRONG
    if misclassified <= eps * n_total:
        return Reconstruction.EPS_WEAK
    return Reconstruction.FAIL


def convergence_round(trajectory):
    """First round ``t*`` whose coloring persists to the end of the horizon.

    Returns ``None`` when the last two colorings differ.  Accepts a
    :class:`~avgdyn.dynamics.DynamicsTrajectory` or a ``(rounds, N)`` array of
    colorings (row ``t-1`` = round ``t``).
    """
    cols = getattr(trajectory, "colorings", trajectory)
    cols = np.asarray(cols)
    if cols.shape[0] < 2:
        raise ParameterError("need at least two colorings")
    last = cols[-1]
    if not np.array_equal(cols[-2], last):
        return None
    same = np.all(cols == last, axis=1)
    i = cols.shape[0] - 1
    while i > 0 and same[i - 1]:
        i -= 1
    return i + 1


def same_partition(labels, truth):
    """True iff ``labels`` and ``truth`` induce the same partition of the nodes."""
    a = np.asarray(labels).ravel()
    b = np.asarray(truth).ravel()
    if a.size != b.size:
        return False
    pairs = np.unique(np.column_stack([a, b]), axis=0)
    return len(pairs) == np.unique(a).size == np.unique(b).size


@dataclass
class ReconstructionReport:
    agreement: np.ndarray  # per round 1..T
    permutations: list
    eps: float
    n_total: int
    convergence_round: int | None
    meta: dict = field(default_factory=dict)

    @property
    def rounds(self):
        return len(self.agreement)

    @property
    def final_agreement(self):
        return float(self.agreement[-1])

    @property
    def misclassified_fraction(self):
        return 1.0 - self.final_agreement

    @property
    def strong(self):
        return classify_reconstruction(self.final_agreement, self.n_total, 0.0) is Reconstruction.STRONG

    def eps_weak(self, eps=None):
        eps = self.eps if eps is None else eps
        return classify_reconstruction(self.final_agreement, self.n_total, eps) is not Reconstruction.FAIL

    @property
    def first_strong_round(self):
        hits = np.flatnonzero(self.agreement >= 1.0)
        return int(hits[0]) + 1 if hits.size else None

    def to_dict(self):
        return {
            "rounds": self.rounds,
            "agreement": [float(a) for a in self.agreement],
            "permutations": [list(p) for p in self.permutations],
            "final_agreement": self.final_agreement,
            "strong": self.strong,
            "eps": self.eps,
            "eps_weak": self.eps_weak(),
            "first_strong_round": self.first_strong_round,
            "convergence_round": self.convergence_round,
            **({"meta": self.meta} if self.meta else {}),
        }


def reconstruction_report(trajectory, truth, k=2, eps=0.1):
    """Agreement of every round's coloring with ``truth``."""
    cols = trajectory.colorings
    agr = np.empty(cols.shape[0])
    perms = []
    for i, row in enumerate(cols):
        agr[i], p = agreement(row, truth, k)
        perms.append(p)
    return ReconstructionReport(agr, perms, float(eps), int(cols.shape[1]), convergence_round(cols))


def rademacher_projection_test(w, delta, trials=100_000, seed=0, chunk=2000):
    """Monte-Carlo estimate of ``Pr[|<w / sqrt(len w), x>| <= delta]`` for Rademacher ``x``.

    For ``+-1`` weights ``<w, x>`` has the law of ``2 Binomial(len, 1/2) - len``
    and is sampled that way; other weights are sampled entry-wise in chunks.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    trials = int(trials)
    if trials < 10_000:
        raise ParameterError(f"need at least 10^4 trials, got {trials}")
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    L = w.size
    rng = _rng.stream(seed, _rng.PROJECTION_TRIALS)
    limit = delta * math.sqrt(L)
    if np.all(np.abs(w) == 1.0):
        sums = 2.0 * rng.binomial(L, 0.5, size=trials) - L
        return float(np.mean(np.abs(sums) <= limit + 1e-9))
    hits = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        x = rng.integers(0, 2, size=(m, L), dtype=np.int8) * 2 - 1
        s = x @ w
        hits += int(np.count_nonzero(np.abs(s) <= limit + 1e-9))
        done += m
    return hits / trials


def sweep_summary(reports, params=None, seeds=None):
    """Aggregate row over a list of reports of one sweep cell."""
    if not reports:
        raise ParameterError("need at least one report")
    agr = [r.final_agreement for r in reports]
    conv = [r.convergence_round for r in reports if r.convergence_round is not None]
    row = dict(params or {})
    row.update(
        num_runs=len(reports),
        mean_agreement=statistics.fmean(agr),
        median_agreement=statistics.median(agr),
        agreement_variance=statistics.pvariance(agr) if len(agr) > 1 else 0.0,
        strong_frequency=sum(r.strong for r in reports) / len(reports),
        median_convergence_round=statistics.median(conv) if conv else None,
    )
    if seeds is not None:
        row["seeds"] = list(seeds)
    return row


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return v


def write_summary_csv(rows, fh, columns=None):
    """RFC-4180 CSV with a header row; floats use 17 significant digits."""
    rows = list(rows)
    if columns is None:
        columns = []
        for r in rows:
            for c in r:
                if c not in columns:
                    columns.append(c)
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
