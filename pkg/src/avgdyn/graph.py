"""Immutable clustered multigraphs, regularity checks and the expected matrix.

Nodes are labeled ``0..N-1`` and, in a :class:`ClusteredGraph`, community
``i`` occupies the contiguous block ``[i*n, (i+1)*n)``.  Edges carry positive
integer multiplicities.  A self-loop of multiplicity ``m`` is stored as the
diagonal entry ``A[v, v] = m`` and adds ``m`` to the degree, so ``P = D^-1 A``
stays row-stochastic and the node's own value enters its average with weight
``m``.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .exceptions import (
    DegenerateInputError,
    GraphParseError,
    InconsistencyError,
    ParameterError,
)

__all__ = [
    "Graph",
    "ClusteredGraph",
    "RegularityProfile",
    "ExpectedMatrix",
    "RegularityCheck",
    "GammaCheck",
    "validate_clustered_regular",
    "validate_gamma_clustered",
    "expected_matrix",
    "partition_vector",
    "community_indicators",
    "load_graph",
    "save_graph",
    "dumps_graph",
    "loads_graph",
]


def _readonly(a):
    a.flags.writeable = False
    return a


class Graph:
    """Symmetric multigraph backed by a CSR matrix of integer multiplicities."""

    def __init__(self, adjacency):
        A = sp.csr_matrix(adjacency)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ParameterError(f"adjacency must be square, got shape {A.shape}")
        if A.shape[0] < 1:
            raise ParameterError("graph must have at least one node")
        data = A.data
        if data.size and not np.issubdtype(data.dtype, np.integer):
            if not np.all(np.isfinite(data)) or np.any(data != np.round(data)):
                raise ParameterError("edge multiplicities must be integers")
        # always copy: the arrays are frozen below and must not alias the caller's
        A = sp.csr_matrix(A, dtype=np.int64, copy=True)
        A.eliminate_zeros()
        if A.nnz and A.data.min() < 0:
            raise ParameterError("edge multiplicities must be positive")
        if (A != A.T).nnz:
            raise InconsistencyError("adjacency is not symmetric")
        A.sort_indices()
        A.has_canonical_format = True
        _readonly(A.data)
        _readonly(A.indices)
        _readonly(A.indptr)
        self._A = A
        self._deg = _readonly(np.asarray(A.sum(axis=1)).ravel().astype(np.int64))

    # -- basic accessors -------------------------------------------------
    @property
    def adjacency(self):
        """Read-only CSR adjacency (multiplicities, sorted neighbor lists)."""
        return self._A

    @property
    def degrees(self):
        return self._deg

    @property
    def num_nodes(self):
        return self._A.shape[0]

    @property
    def num_edges(self):
        """Multiplicity-weighted count of undirected edges (loops once)."""
        A = self._A
        loops = int(A.diagonal().sum())
        return (int(A.data.sum()) - loops) // 2 + loops

    def neighbors(self, v):
        """Return ``(neighbor_ids, multiplicities)`` of node ``v``, sorted."""
        lo, hi = self._A.indptr[v], self._A.indptr[v + 1]
        return self._A.indices[lo:hi], self._A.data[lo:hi]

    def multiplicity(self, u, v):
        nbrs, mult = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        if i < nbrs.size and nbrs[i] == v:
            return int(mult[i])
        return 0

    def edges(self):
        """Array of ``(u, v, m)`` rows with ``u <= v``, lexicographically sorted."""
        coo = sp.triu(self._A, format="coo")
        order = np.lexsort((coo.col, coo.row))
        return np.column_stack([coo.row[order], coo.col[order], coo.data[order]]).astype(np.int64)

    def has_isolated_nodes(self):
        return bool(np.any(self._deg == 0))

    def is_connected(self):
        ncomp, _ = connected_components(self._A, directed=False)
        return ncomp == 1 and not self.has_isolated_nodes()

    def require_no_isolated(self):
        if self.has_isolated_nodes():
            bad = np.flatnonzero(self._deg == 0)
            raise DegenerateInputError(
                f"{bad.size} isolated node(s), first: {bad[:5].tolist()}"
            )

    def toarray(self):
        return self._A.toarray()

    def transition_matrix(self):
        """Sparse ``P = D^-1 A`` (float64)."""
        self.require_no_isolated()
        return sp.diags(1.0 / self._deg) @ self._A

    def normalized_adjacency(self):
        """Sparse ``N = D^-1/2 A D^-1/2`` (float64)."""
        self.require_no_isolated()
        s = sp.diags(1.0 / np.sqrt(self._deg))
        return (s @ self._A @ s).tocsr()

    def _same_structure(self, other):
        if self._A.shape != other._A.shape:
            return False
        return (self._A != other._A).nnz == 0

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._same_structure(other)

    __hash__ = None

    def __repr__(self):
        return f"{type(self).__name__}(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


class ClusteredGraph(Graph):
    """A :class:`Graph` with ``k`` equal-size, block-contiguous communities."""

    def __init__(self, adjacency, community_size, num_communities=2):
        super().__init__(adjacency)
        n, k = int(community_size), int(num_communities)
        if k < 2:
            raise ParameterError(f"need at least 2 communities, got {k}")
        if n < 1:
            raise ParameterError(f"community size must be positive, got {n}")
        if n * k != self.num_nodes:
            raise InconsistencyError(
                f"{k} communities of size {n} do not cover {self.num_nodes} nodes"
            )
        self._n = n
        self._k = k
        self._truth = _readonly(np.repeat(np.arange(k, dtype=np.int64), n))

    @classmethod
    def from_edges(cls, edges, community_size, num_communities=2):
        """Build from ``(u, v, m)`` records; repeated pairs add multiplicities."""
        n, k = int(community_size), int(num_communities)
        N = n * k
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 3)
        if e.size and (e[:, :2].min() < 0 or e[:, :2].max() >= N):
            raise ParameterError("edge endpoint out of range")
        if e.size and e[:, 2].min() < 1:
            raise ParameterError("multiplicities must be >= 1")
        u, v, m = e[:, 0], e[:, 1], e[:, 2]
        off = u != v
        rows = np.concatenate([u, v[off]])
        cols = np.concatenate([v, u[off]])
        data = np.concatenate([m, m[off]])
        A = sp.coo_matrix((data, (rows, cols)), shape=(N, N)).tocsr()
        A.sum_duplicates()
        return cls(A, n, k)

    @property
    def community_size(self):
        return self._n

    @property
    def num_communities(self):
        return self._k

    @property
    def truth(self):
        return self._truth

    def community_degrees(self):
        """``(N, k)`` array: multiplicity-weighted neighbors of each node per community."""
        ind = sp.csr_matrix(
            (np.ones(self.num_nodes), (np.arange(self.num_nodes), self._truth)),
            shape=(self.num_nodes, self._k),
        )
        return np.asarray((self._A @ ind).toarray()).astype(np.int64)

    def cross_degrees(self):
        """Neighbors (with multiplicity) outside the node's own community."""
        cd = self.community_degrees()
        own = cd[np.arange(self.num_nodes), self._truth]
        return self.degrees - own

    def with_adjacency(self, adjacency):
        return ClusteredGraph(adjacency, self._n, self._k)

    def _same_structure(self, other):
        return (self._n, self._k) == (other._n, other._k) and super()._same_structure(other)

    def __repr__(self):
        return (
            f"ClusteredGraph(n={self._n}, k={self._k}, num_nodes={self.num_nodes}, "
            f"num_edges={self.num_edges})"
        )


@dataclass(frozen=True)
class RegularityProfile:
    """Nominal degree ``d``, cross-degree ``b`` and slack ``gamma``."""

    d: float
    b: float
    gamma: float = 0.0
    nu: float = field(init=False)

    def __post_init__(self):
        if not self.d > 0:
            raise ParameterError(f"nominal degree must be positive, got {self.d}")
        if self.b < 0 or self.b > self.d:
            raise ParameterError(f"need 0 <= b <= d, got b={self.b}, d={self.d}")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be non-negative, got {self.gamma}")
        object.__setattr__(self, "nu", 1.0 - 2.0 * self.b / self.d)


class ExpectedMatrix:
    """Block-constant ``B = E[A]`` for two communities of size ``n``.

    On-diagonal blocks hold ``p = a/n``, off-diagonal blocks ``q = b/n``.  The
    matrix has rank two, ``B = (d/2n) 1 1^T + ((a-b)/2n) chi chi^T``, which is
    how :meth:`matvec` applies it; :meth:`toarray` materializes it densely.
    """

    def __init__(self, n, a, b):
        self.n = int(n)
        self.a = float(a)
        self.b = float(b)

    @property
    def num_nodes(self):
        return 2 * self.n

    shape = property(lambda self: (2 * self.n, 2 * self.n))

    @property
    def p(self):
        return self.a / self.n

    @property
    def q(self):
        return self.b / self.n

    @property
    def d(self):
        return self.a + self.b

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        n = self.n
        top, bot = x[:n], x[n:]
        s1 = top.sum(axis=0)
        s2 = bot.sum(axis=0)
        c1 = self.d / (2 * n) * (s1 + s2)
        c2 = (self.a - self.b) / (2 * n) * (s1 - s2)
        out = np.empty_like(x)
        out[:n] = c1 + c2
        out[n:] = c1 - c2
        return out

    def __matmul__(self, x):
        return self.matvec(x)

    def toarray(self):
        n = self.n
        B = np.full((2 * n, 2 * n), self.q)
        B[:n, :n] = self.p
        B[n:, n:] = self.p
        return B

    def __repr__(self):
        return f"ExpectedMatrix(n={self.n}, a={self.a}, b={self.b})"


def expected_matrix(n, a, b):
    """Expected adjacency of the two-community Bernoulli block model."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    if not 0 <= b <= a:
        raise ParameterError(f"need 0 <= b <= a, got a={a}, b={b}")
    if a > n:
        raise ParameterError(f"internal degree a={a} exceeds community size n={n}")
    return ExpectedMatrix(n, a, b)


def _require_two(g):
    if g.num_communities != 2:
        raise ParameterError(f"operation defined for k = 2, got k = {g.num_communities}")


def partition_vector(g):
    """The indicator ``chi``: +1 on community 0, -1 on community 1."""
    _require_two(g)
    return np.where(g.truth == 0, 1.0, -1.0)


def community_indicators(g):
    """``(N, k)`` 0/1 matrix whose column ``i`` indicates community ``i``."""
    out = np.zeros((g.num_nodes, g.num_communities))
    out[np.arange(g.num_nodes), g.truth] = 1.0
    return out


class RegularityCheck(NamedTuple):
    ok: bool
    violations: list


class GammaCheck(NamedTuple):
    ok: bool
    gamma_star: float


def validate_clustered_regular(g, d, b):
    """Check that every node has degree ``d`` and exactly ``b`` cross neighbors.

    Returns ``(ok, violations)`` where ``violations`` lists offending nodes in
    increasing order.
    """
    _require_two(g)
    cross = g.cross_degrees()
    bad = np.flatnonzero((g.degrees != d) | (cross != b))
    return RegularityCheck(bad.size == 0, bad.tolist())


def validate_gamma_clustered(g, profile):
    """Check degrees ``d +- gamma d`` and cross-degrees ``b +- gamma d``.

    Also returns ``gamma_star``, the smallest slack that would make ``g`` pass.
    """
    _require_two(g)
    d, b = float(profile.d), float(profile.b)
    if not d > 0:
        raise ParameterError(f"nominal degree must be positive, got {d}")
    deg_dev = np.abs(g.degrees - d).max()
    cross_dev = np.abs(g.cross_degrees() - b).max()
    gamma_star = float(max(deg_dev, cross_dev) / d)
    return GammaCheck(bool(gamma_star <= profile.gamma + 1e-12), gamma_star)


# -- file format ---------------------------------------------------------

def _ints(tokens, lineno, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise GraphParseError(f"non-integer token in {what}", lineno) from None


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def loads_graph(text):
    """Parse the text graph format (see :func:`save_graph`)."""
    lines = _content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphParseError("empty graph file") from None
    head = _ints(header.split(), lineno, "header")
    if len(head) != 3:
        raise GraphParseError("header must be 'N k n'", lineno)
    N, k, n = head
    if k < 2 or n < 1 or N != k * n:
        raise GraphParseError(f"header N={N} is not k*n = {k}*{n}", lineno)
    try:
        lineno, label_line = next(lines)
    except StopIteration:
        raise GraphParseError("missing community label line") from None
    labels = np.array(_ints(label_line.split(), lineno, "labels"), dtype=np.int64)
    if labels.size != N:
        raise GraphParseError(f"expected {N} labels, found {labels.size}", lineno)
    if labels.min() < 0 or labels.max() >= k:
        raise GraphParseError(f"labels must lie in 0..{k - 1}", lineno)
    sizes = np.bincount(labels, minlength=k)
    if np.any(sizes != n):
        raise GraphParseError(
            f"community sizes {sizes.tolist()} do not match declared n={n}", lineno
        )
    if np.any(labels != np.repeat(np.arange(k), n)):
        raise InconsistencyError("community labels are not block-contiguous", lineno)

    records = {}
    for lineno, line in lines:
        vals = _ints(line.split(), lineno, "edge record")
        if len(vals) != 3:
            raise GraphParseError("edge record must be 'u v m'", lineno)
        u, v, m = vals
        if not (0 <= u < N and 0 <= v < N):
            raise GraphParseError(f"node id out of range 0..{N - 1}", lineno)
        if m < 1:
            raise GraphParseError("multiplicity must be >= 1", lineno)
        key = (min(u, v), max(u, v))
        if key in records:
            prev_m, prev_line, prev_dir = records[key]
            if u != v and prev_dir is not None and prev_dir != (u <= v) and prev_m == m:
                # the reverse orientation repeated consistently
                records[key] = (m, prev_line, None)
                continue
            raise InconsistencyError(
                f"edge {key} conflicts with the record on line {prev_line}", lineno
            )
        records[key] = (m, lineno, u <= v)

    asym = [k_ for k_, (_, _, fwd) in records.items() if fwd is False]
    if asym:
        key = asym[0]
        raise InconsistencyError(
            f"edge record {key[1]} {key[0]} has u > v without a matching reverse record",
            records[key][1],
        )
    edges = np.array([(u, v, m) for (u, v), (m, _, _) in records.items()], dtype=np.int64)
    return ClusteredGraph.from_edges(edges.reshape(-1, 3), n, k)


def dumps_graph(g, comment=None):
    """Serialize ``g``; the output is a pure function of the graph (and comment)."""
    buf = io.StringIO()
    if comment:
        for line in str(comment).splitlines():
            buf.write(f"# {line}\n")
    buf.write(f"{g.num_nodes} {g.num_communities} {g.community_size}\n")
    buf.write(" ".join(map(str, g.truth.tolist())) + "\n")
    e = g.edges()
    if e.size:
        buf.write("\n".join(f"{u} {v} {m}" for u, v, m in e.tolist()))
        buf.write("\n")
    return buf.getvalue()


def save_graph(g, path, comment=None):
    """Write ``g`` in the text graph format.

    Line 1 is ``N k n``, line 2 the ``N`` community labels, then one
    ``u v m`` record per undirected edge with ``u <= v`` (``u u m`` is a
    self-loop).  Lines starting with ``#`` are comments.
    """
    with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_graph(g, comment))


def load_graph(path):
    with open(os.fspath(path), encoding="utf-8") as fh:
        return loads_graph(fh.read())
