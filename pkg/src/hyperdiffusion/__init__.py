"""Heat diffusion, resolvents and local partitioning on weighted hypergraphs."""

from .diffusion import DiffusionTrace, diffuse, heat_step
from .errors import (
    ConstantVector,
    DegenerateCut,
    DisconnectedGraph,
    EmptyHyperedge,
    HypergraphError,
    InvalidCutFunction,
    InvalidEpsilon,
    NonpositiveConstants,
    NonpositiveWeight,
    SingletonHyperedge,
    ToleranceNotReached,
    Unbounded,
    VertexOutOfRange,
)
from .hypergraph import (
    CutProfile,
    Hypergraph,
    bipartite_to_hypergraph,
    build,
    clique_expansion,
    conductance,
    connected,
    graph_laplacian,
    knn_graph,
    knn_hypergraph,
)
from .laplacian import MinNormResult, SubgradientCertificate, any_subgradient, min_norm_subgradient
from .partition import SweepResult, local_partition, sweep_cut
from .potentials import (
    CutFunction,
    L2Norm,
    LInfNorm,
    LovaszNorm,
    PotentialModel,
    estimate_lambda,
    lovasz_value,
    min_shift_norm,
    poincare_lower_bound,
    potential,
    rayleigh,
)
from .resolvent import (
    FixedPointResidual,
    ProxOperator,
    ResolventProblem,
    ResolventSolution,
    graph_resolvent_series,
    last_iterate_heuristic,
    omd_minimize,
    ppr,
    resolvent_solve,
)

__version__ = "0.1.0"
