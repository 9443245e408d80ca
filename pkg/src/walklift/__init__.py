"""walklift: coined quantum walks, lifted Markov chains, stochastic
bridges, and conductance bounds on finite graphs."""

from .graphs import (
    Dist,
    Graph,
    LocalityReport,
    NodeSet,
    check_locality_trace,
    neighborhood,
    parse_edge_list,
    tv_distance,
)
from .channels import (
    ChannelReport,
    CoinAssignment,
    DensityOp,
    KrausChannel,
    LiftedSpace,
    MeasuredUnitaryChannel,
    init_map,
    measured_unitary_channel,
    node_marginal,
    step,
    validate_channel,
)
from .processes import (
    CesaroProcess,
    ChainProcess,
    ChannelProcess,
    StochProcess,
    cesaro,
    check_invariance,
    induced_process,
)
from .chains import (
    LiftedChain,
    StochMatrix,
    as_channel,
    from_matrix,
    induced_chain,
    is_irreducible,
    joint_stationary,
    lifted_graph,
    lmc_evolve,
    stationary,
)
from .bridges import (
    BridgeInfeasibleError,
    BridgeSequence,
    FlowNetwork,
    FlowResult,
    bridge_sequence,
    build_flow_network,
    extract_bridge,
    max_flow,
)
from .lifts import (
    ClockLift,
    SimulationReport,
    amplified_lift,
    clock_lift,
    lift_from_process,
    verify_simulation,
)
from .conductance import (
    BoundCheckReport,
    ConductanceResult,
    CutReport,
    EscapeReport,
    ergodic_flow,
    escape_bound_check,
    graph_conductance,
    mixing_lower_bound_check,
    phi_chain,
    phi_cut,
    torus_graph_conductance,
)
from .mixing import MixingResult, amplification_bound, default_horizon, mixing_time, tv_trajectory
from .lattices import (
    CycleParams,
    LatticeCheckReport,
    MultiscaleReport,
    TorusParams,
    classical_walk,
    cycle_lmc,
    cycle_qw,
    lattice_floor_checks,
    multiscale_curve,
    multiscale_experiment,
    single_toss_probability,
    torus_graph,
    torus_lmc,
    uniform_floor_horizon,
)

__version__ = "0.1.0"
