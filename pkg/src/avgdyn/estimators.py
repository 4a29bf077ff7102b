"""scikit-learn style wrappers around the protocol.

Both estimators are transductive clusterers: ``fit`` takes a graph (or an
adjacency matrix) and sets ``labels_``; ``fit_predict`` comes from
:class:`~sklearn.base.ClusterMixin`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .dynamics import run_protocol, signature_run
from .metrics import convergence_round
from .validation import check_graph, check_seed

__all__ = ["AveragingClustering", "SignatureClustering"]


class AveragingClustering(ClusterMixin, BaseEstimator):
    """Two-way clustering by the coloring of the Averaging protocol.

    Parameters
    ----------
    n_rounds : int
        Number of synchronous rounds; ``labels_`` is the coloring of the last
        one (0 = blue, 1 = red).
    random_state : int, Generator or None
        Seed of the Rademacher initialization.

    Attributes
    ----------
    labels_ : ndarray of shape (num_nodes,)
    trajectory_ : DynamicsTrajectory
    convergence_round_ : int or None
    seed_ : int
    """

    def __init__(self, n_rounds=100, random_state=None):
        self.n_rounds = n_rounds
        self.random_state = random_state

    def fit(self, X, y=None):
        g = check_graph(X)
        self.seed_ = check_seed(self.random_state)
        self.trajectory_ = run_protocol(g, self.n_rounds, seed=self.seed_)
        self.labels_ = (~self.trajectory_.coloring(self.n_rounds)).astype(np.int64)
        self.convergence_round_ = (
            convergence_round(self.trajectory_) if self.n_rounds >= 2 else None
        )
        return self


class SignatureClustering(ClusterMixin, BaseEstimator):
    """Clustering by signatures over ``n_runs`` independent protocol runs.

    Nodes whose type is undetermined in some run receive singleton labels and
    are flagged in ``assigned_``.

    Parameters
    ----------
    n_runs : int
    burn_in : int or None
        First round of the monotonicity window; ``None`` uses the default
        ``ceil(10 ln N)``.
    window : int
    n_rounds : int or None
        Rounds per run (``burn_in + window`` when ``None``).
    random_state : int, Generator or None
    """

    def __init__(self, n_runs=12, burn_in=None, window=10, n_rounds=None, random_state=None):
        self.n_runs = n_runs
        self.burn_in = burn_in
        self.window = window
        self.n_rounds = n_rounds
        self.random_state = random_state

    def fit(self, X, y=None):
        g = check_graph(X)
        self.seed_ = check_seed(self.random_state)
        table = signature_run(
            g, self.n_runs, T=self.burn_in, W=self.window, T_max=self.n_rounds, seed=self.seed_
        )
        self.table_ = table
        self.labels_ = table.labels
        self.signatures_ = table.types
        self.assigned_ = table.assigned
        self.n_clusters_ = table.num_groups
        return self
