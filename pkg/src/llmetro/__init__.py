"""Lazy local Metropolis sampler for proper graph colorings.

A synchronous propose-and-filter Markov chain in which every vertex
independently goes lazy or proposes a color each round, plus the machinery
to audit it: couplings with disagreement tracking, exact small-instance
transition matrices, and seeded experiment drivers.
"""

from .chain import (
    ChainParams,
    Coloring,
    EdgeCheckContext,
    EdgeKind,
    MalformedContext,
    NoAvailableColor,
    StepChoices,
    accepted_vertices,
    available_colors,
    check_edge,
    glauber_step,
    is_proper,
    monochromatic,
    run,
    sample_choices,
    step,
    step_mixed,
    validate_coloring,
)
from .coupling import (
    CoupledPair,
    CouplingTrace,
    NotAdjacent,
    ProposalCouplingMode,
    ProposalMode,
    TraceRecord,
    couple_proposals,
    couple_until_coalesced,
    local_coupling_step,
    local_coupling_violations,
    path_coupling_step,
    run_identical_coupling,
)
from .exact import (
    ExactChain,
    GammaViolated,
    MixingCurve,
    StateSpaceTooLarge,
    build_exact_chain,
    detailed_balance_residual,
    dyer_frieze_oracle,
    empirical_tv,
    enumerate_proper,
    expected_missed_uniform,
    mixing_curve,
)
from .graph import (
    GirthResult,
    GirthTooSmall,
    Graph,
    GraphFormatError,
    MixedGraph,
    ball,
    complete_graph,
    complete_tree,
    cycle_graph,
    erdos_renyi,
    girth,
    load_graph,
    make_graph,
    orient_ball_inward,
    path_graph,
    petersen_graph,
    save_graph,
    sphere,
    star_graph,
)

__version__ = "0.1.0"
