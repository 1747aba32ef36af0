"""Adaptive intervention design for cyclic linear non-Gaussian causal models.

The observational equivalence class of a cyclic LSCM is represented as the
perfect matchings of a bipartite graph built from an (ideal) ICA output.
Single-variable interventions each reveal one matching edge; a greedy
policy picks the intervention that is expected to eliminate the most
candidate graphs.
"""

from .graph_core import (
    Cycle,
    DirectedGraph,
    SccPartition,
    enumerate_equivalence_class,
    equivalent,
    reverse_cycle,
    scc,
)
from .lscm import (
    IcaOutput,
    InterventionResult,
    WeightMatrix,
    generate_er_model,
    ica_oracle,
    intervene,
    recover_row,
)
from .matching import (
    BipartiteGraph,
    Matching,
    apply_revealed_edge,
    edge_marginals,
    enumerate_matchings,
    is_unique,
    sample_matching,
)
from .policy import (
    BenefitEstimate,
    PartialRealization,
    PolicyKind,
    check_adaptive_submodularity,
    marginal_benefit_exact,
    marginal_benefit_sampled,
    normalized_benefit,
    run_identification,
    select_next,
)
from .fvs import FvsResult, is_acyclic, min_fvs

__version__ = "0.1.0"
