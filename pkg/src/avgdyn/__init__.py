"""Simulation and verification toolkit for Averaging-dynamics community detection."""

from .dynamics import (
    DynamicsTrajectory,
    NodeType,
    SignatureTable,
    averaging_step,
    classify_types,
    rademacher_init,
    run_protocol,
    signature_run,
)
from .exceptions import (
    AvgDynError,
    ConvergenceError,
    DegenerateInputError,
    GraphFormatError,
    GraphParseError,
    InconsistencyError,
    ParameterError,
)
from .generate import (
    ModelParams,
    gen_bernoulli_sbm,
    gen_deterministic_clustered,
    gen_k_regular_clustered,
    gen_regular_sbm,
    generate,
)
from .graph import (
    ClusteredGraph,
    ExpectedMatrix,
    Graph,
    RegularityProfile,
    expected_matrix,
    load_graph,
    partition_vector,
    save_graph,
    validate_clustered_regular,
    validate_gamma_clustered,
)
from .metrics import agreement, convergence_round, reconstruction_report

__version__ = "0.1.0"
