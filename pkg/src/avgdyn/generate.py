"""Seeded generators for clustered graphs.

All random generators are pure functions of their parameters: each matching
or Bernoulli block draws from its own stream ``_rng.stream(seed, *key)``, so
output does not depend on generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .exceptions import ParameterError
from .graph import ClusteredGraph

__all__ = [
    "MODEL_KINDS",
    "ModelParams",
    "generate",
    "gen_bernoulli_sbm",
    "gen_regular_sbm",
    "gen_k_regular_clustered",
    "gen_deterministic_clustered",
    "random_matching",
    "random_bipartite_matching",
]

MODEL_KINDS = ("bernoulli-sbm", "regular-sbm", "k-regular-clustered", "deterministic-circulant")


def _is_int(x):
    return float(x) == math.floor(float(x))


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one graph family.

    ``a`` is the internal degree (``a = p n`` for the Bernoulli model), ``b``
    the external degree towards each foreign community.  For the
    deterministic circulant family ``d = a + b``.
    """

    kind: str
    n: int
    a: float
    b: float
    k: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ParameterError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        if int(self.k) != self.k or self.k < 2:
            raise ParameterError(f"k must be an integer >= 2, got {self.k}")
        if self.a < 0 or self.b < 0:
            raise ParameterError(f"degrees must be non-negative, got a={self.a}, b={self.b}")
        # q <= p is a Bernoulli-model premise; matching unions accept any a, b
        if self.kind == "bernoulli-sbm" and self.b > self.a:
            raise ParameterError(f"need 0 <= b <= a, got a={self.a}, b={self.b}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.kind == "bernoulli-sbm" and self.a > self.n:
            raise ParameterError(f"a={self.a} exceeds n={self.n}: p = a/n > 1")
        if self.kind in ("regular-sbm", "k-regular-clustered"):
            if not (_is_int(self.a) and _is_int(self.b)):
                raise ParameterError("regular models need integer degrees a, b")
            if self.n % 2:
                raise ParameterError(f"regular models need even n, got {self.n}")

    @property
    def d(self):
        return self.a + (self.k - 1) * self.b


def generate(params):
    """Dispatch on ``params.kind``."""
    if params.kind == "bernoulli-sbm":
        return gen_bernoulli_sbm(params)
    if params.kind == "regular-sbm":
        return gen_regular_sbm(params)
    if params.kind == "k-regular-clustered":
        return gen_k_regular_clustered(params)
    return gen_deterministic_clustered(params.n, int(params.a + params.b), int(params.b))


# -- matchings -------------------------------------------------------------

def random_matching(nodes, rng):
    """Uniform perfect matching of ``nodes`` (even length): shuffle, pair neighbors."""
    perm = rng.permutation(np.asarray(nodes))
    return perm.reshape(-1, 2)


def random_bipartite_matching(left, right, rng):
    """Uniform perfect matching between equal-size node arrays."""
    left = np.asarray(left)
    return np.column_stack([left, rng.permutation(np.asarray(right))])


def _as_records(pairs):
    pairs = np.sort(pairs, axis=1)
    return np.column_stack([pairs, np.ones(len(pairs), dtype=np.int64)])


def gen_k_regular_clustered(params):
    """Union-of-matchings model with ``k`` communities.

    Each community's internal graph is the union of ``a`` independent uniform
    perfect matchings and each unordered pair of communities is joined by the
    union of ``b`` independent bipartite perfect matchings.  Coinciding
    matchings give parallel edges, so every node has degree exactly
    ``a + (k-1) b``.
    """
    if params.kind not in ("regular-sbm", "k-regular-clustered"):
        raise ParameterError(f"expected a regular model, got {params.kind!r}")
    n, k, seed = int(params.n), int(params.k), int(params.seed)
    a, b = int(params.a), int(params.b)
    if a + b < 1:
        raise ParameterError("need a + b >= 1")
    blocks = [np.arange(i * n, (i + 1) * n) for i in range(k)]
    parts = []
    for i in range(k):
        for j in range(a):
            rng = _rng.stream(seed, _rng.INTERNAL_MATCHING, i, j)
            parts.append(random_matching(blocks[i], rng))
    for i in range(k):
        for j in range(i + 1, k):
            for s in range(b):
                rng = _rng.stream(seed, _rng.CROSS_MATCHING, i, j, s)
                parts.append(random_bipartite_matching(blocks[i], blocks[j], rng))
    pairs = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    return ClusteredGraph.from_edges(_as_records(pairs), n, k)


def gen_regular_sbm(params):
    """Two-community regular block model (union of random matchings)."""
    if params.kind != "regular-sbm" or params.k != 2:
        raise ParameterError("gen_regular_sbm needs kind='regular-sbm' and k=2")
    return gen_k_regular_clustered(params)


# -- Bernoulli block model -------------------------------------------------

def _sample_subset(total, prob, rng):
    # a uniform subset of Binomial(total, prob) size is distributed exactly like
    # independent Bernoulli(prob) indicators over the total slots
    if prob >= 1.0:
        return np.arange(total, dtype=np.int64)
    if prob <= 0.0 or total == 0:
        return np.empty(0, dtype=np.int64)
    count = int(rng.binomial(total, prob))
    return np.sort(rng.choice(total, size=count, replace=False)).astype(np.int64)


def _triangle_pairs(idx, n):
    """Map linear indices over pairs ``i < j`` of ``range(n)`` (row-major) to pairs."""
    rows = np.arange(n - 1, dtype=np.int64)
    offsets = rows * n - rows * (rows + 1) // 2
    i = np.searchsorted(offsets, idx, side="right") - 1
    j = idx - offsets[i] + i + 1
    return np.column_stack([i, j])


def gen_bernoulli_sbm(params):
    """Simple two-community graph with edge probabilities ``a/n`` and ``b/n``."""
    if params.kind != "bernoulli-sbm" or params.k != 2:
        raise ParameterError("gen_bernoulli_sbm needs kind='bernoulli-sbm' and k=2")
    n, seed = int(params.n), int(params.seed)
    p, q = params.a / n, params.b / n
    if q > p or p > 1:
        raise ParameterError(f"need 0 <= q <= p <= 1, got p={p}, q={q}")
    parts = []
    for c in range(2):
        rng = _rng.stream(seed, _rng.BERNOULLI_INTRA, c)
        idx = _sample_subset(n * (n - 1) // 2, p, rng)
        parts.append(_triangle_pairs(idx, n) + c * n)
    rng = _rng.stream(seed, _rng.BERNOULLI_CROSS)
    idx = _sample_subset(n * n, q, rng)
    i, j = np.divmod(idx, n)
    parts.append(np.column_stack([i, j + n]))
    pairs = np.concatenate(parts)
    return ClusteredGraph.from_edges(_as_records(pairs), n, 2)


# -- deterministic construction -------------------------------------------

def circulant_offsets(n, degree):
    """Offsets of a circulant graph of the given degree on ``n`` nodes.

    Even degree uses ``+-1 .. +-degree/2``; odd degree additionally needs the
    antipodal offset ``n/2`` and therefore an even ``n``.
    """
    if degree < 0 or degree > n - 1:
        raise ParameterError(f"circulant degree {degree} not in 0..{n - 1}")
    half = degree // 2
    offsets = list(range(1, half + 1))
    if degree % 2:
        if n % 2:
            raise ParameterError(f"odd circulant degree {degree} needs even n, got {n}")
        offsets.append(n // 2)
    return offsets


def gen_deterministic_clustered(n, d, b):
    """Two circulant communities joined by ``b`` shifted perfect matchings.

    Community graphs have degree ``d - b``; node ``i`` of the first community
    is joined to node ``(i + s) mod n`` of the second for ``s = 0..b-1``.  The
    result is a ``(2n, d, b)``-clustered regular graph.
    """
    n, d, b = int(n), int(d), int(b)
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not 1 <= b < d <= n:
        raise ParameterError(f"need 1 <= b < d <= n, got n={n}, d={d}, b={b}")
    if b > n:
        raise ParameterError("b shifted matchings need b <= n")
    offsets = circulant_offsets(n, d - b)
    i = np.arange(n, dtype=np.int64)
    parts = []
    for c in range(2):
        for off in offsets:
            if 2 * off == n:
                src = i[: n // 2]
                parts.append(np.column_stack([src, src + off]) + c * n)
            else:
                parts.append(np.column_stack([i, (i + off) % n]) + c * n)
    for s in range(b):
        parts.append(np.column_stack([i, (i + s) % n + n]))
    pairs = np.concatenate(parts)
    return ClusteredGraph.from_edges(_as_records(pairs), n, 2)
