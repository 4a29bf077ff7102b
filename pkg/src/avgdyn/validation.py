"""Input validation helpers shared by the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
import scipy.sparse as sp

from .exceptions import ParameterError
from .graph import ClusteredGraph, Graph

__all__ = ["check_graph", "check_vector", "check_seed"]


def check_graph(X, community_size=None, num_communities=None):
    """Coerce ``X`` to a :class:`Graph`.

    ``X`` may be a graph object, a scipy sparse matrix or a dense array of
    non-negative integer multiplicities.  With ``community_size`` (and
    optionally ``num_communities``) a :class:`ClusteredGraph` is returned.
    """
    if isinstance(X, Graph):
        if community_size is not None and not isinstance(X, ClusteredGraph):
            k = num_communities or X.num_nodes // int(community_size)
            return ClusteredGraph(X.adjacency, community_size, k)
        return X
    if not sp.issparse(X):
        X = np.asarray(X)
        if X.dtype == object:
            raise ParameterError("adjacency must be numeric")
    if community_size is not None:
        n = int(community_size)
        k = int(num_communities) if num_communities is not None else X.shape[0] // n
        return ClusteredGraph(X, n, k)
    return Graph(X)


def check_vector(x, size, name="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (size,):
        raise ParameterError(f"{name} must have shape ({size},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ParameterError(f"{name} must be finite")
    return x


def check_seed(random_state):
    """Unsigned 64-bit seed from ``None``, an int or a numpy Generator/RandomState."""
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1, dtype=np.uint64)[0])
    if isinstance(random_state, numbers.Integral):
        seed = int(random_state)
        if not 0 <= seed < 2**64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {seed}")
        return seed
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2**64, dtype=np.uint64))
    if isinstance(random_state, np.random.RandomState):
        return int(random_state.randint(0, 2**63, dtype=np.int64))
    raise ParameterError(f"cannot derive a seed from {random_state!r}")
