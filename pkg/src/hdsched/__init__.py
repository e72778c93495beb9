"""Half-duplex relay-network schedule optimization via cut-set bounds."""

__version__ = "0.1.0"

from .network import (
    BadSize,
    BadWidths,
    ChannelModel,
    ComplexScalar,
    Cut,
    Edge,
    GainMatrix,
    GroupSchedule,
    InconsistentMarginals,
    InvalidNetwork,
    InvalidSchedule,
    ModeConfig,
    Network,
    NetworkError,
    RealScalar,
    Schedule,
    ShiftLevel,
    gaussian_complex,
    gaussian_real,
    gen_layered,
    gen_line_two_hop,
    linear_deterministic,
    make_network,
)
from .serialize import (
    ParseError,
    group_schedule_from_json,
    group_schedule_to_json,
    network_from_json,
    network_to_json,
    schedule_from_json,
    schedule_to_json,
)
from .gauss import (
    ComponentNotCovered,
    CutGraph,
    ModelMismatch,
    cut_graph,
    decomposed_cut_value,
    expected_cut_value,
    fullduplex_cut_value,
    mode_cut_value,
)
from .lindet import (
    FieldMatrix,
    lindet_expected_cut_value,
    lindet_fullduplex_cut_value,
    lindet_mode_cut_value,
    rank_mod_p,
    shift_matrix,
)
from .sfm import (
    ConvergenceFailure,
    CutObjective,
    GroundSetTooLarge,
    MinCutResult,
    min_cut,
    min_cut_brute,
    min_cut_submodular,
)
from .grouping import (
    GroupingInvalid,
    InternalVerificationFailure,
    NodeGrouping,
    TreeDecomposition,
    UGraph,
    build_clique_graph,
    check_coverage_exhaustive,
    check_sufficient_conditions,
    heuristic_grouping,
    reconstruct_joint,
    tree_decompose,
    tree_decomposition_for,
)
from .solve import (
    ITERATION_CAP,
    INFEASIBLE,
    NetworkTooLarge,
    OPTIMAL,
    ObjectiveSpec,
    RATE_MAX,
    SolveResult,
    duty_min,
    solve_dense,
    solve_dense_rate,
    solve_grouped,
    solve_grouped_lindet,
)
from .baselines import (
    LayerTooThin,
    NotLayered,
    ZeroFullDuplex,
    full_duplex_bound,
    hd_fd_ratio,
    infer_layers,
    naive_schedule,
    simple_random_schedule,
)
from .bench import ExperimentSpec, run_duty_curve, run_experiment, run_ratio_curve, run_single, run_timing
