"""Reputation-constrained packet forwarding as an evolutionary game."""

from .dynamics import (
    EquilibriumReport,
    EssProbe,
    EssVerdict,
    Trajectory,
    basin_prediction,
    classify_ess,
    equilibrium_report,
    forwarding_replicator_rhs,
    general_replicator_rhs,
    integrate,
    integrate_baseline,
    payoff_gap,
    threshold_pT,
)
from .game import (
    DoveStrategy,
    GameParams,
    InfeasibleError,
    NonViableRegimeError,
    PayoffMatrix,
    PopulationState,
    brute_force_dove_strategy,
    dove_utility,
    hawk_utility,
    mean_utility,
    optimal_dove_strategy,
    payoff_matrix,
    reputation_drift,
)
from .manet import (
    NodeClass,
    NodeState,
    RoundRecord,
    SimConfig,
    TopologyConfig,
    generate_topology,
    relay_decision,
    reputation_update,
    run_epoch,
    run_simulation,
)

__version__ = "0.1.0"
