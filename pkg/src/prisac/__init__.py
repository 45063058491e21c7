"""Fairness-aware beamforming for polarization-reconfigurable ISAC arrays.

The library jointly designs the transmit beamformer, the per-antenna and
per-user polarization combiners, and the radar receive filters so that the
worst user SINR and the worst target SCNR are maximized together.  The
constrained max-min program is solved by gradient descent on a product
manifold with an exact-penalty outer loop (`solver.ep_prmgd`); `bench` wraps
seeded Monte-Carlo campaigns around it.
"""

from .scenario import (
    ChannelSet,
    PathRealization,
    ScenarioConfig,
    DEFAULT_SCENARIO,
    DESK_SCENARIO,
    build_comm_channel,
    build_sensing_channel,
    depolarization_matrix,
    field_response_matrix,
    sample_scenario,
    scenario_from_mapping,
    steering_vector,
)
from .manifold import (
    DegenerateRetractionError,
    ProductPoint,
    TangentVector,
    feasibility_residual,
    inner_product,
    load_point,
    point_distance,
    project_to_tangent,
    random_point,
    retract,
    save_point,
)
from .objective import (
    EffectiveLinks,
    MetricReport,
    effective_links,
    exact_penalty_objective,
    lse_smooth,
    max_violation,
    metric_csv_header,
    metric_csv_row,
    metric_report,
    penalized_objective,
    scnr,
    sinr,
)
from .gradients import (
    GradientWeights,
    block_relative_errors,
    euclidean_gradient,
    finite_difference_gradient,
    grad_ab,
    grad_f,
    grad_p_rx,
    grad_p_tx,
    grad_p_user,
    grad_w,
    gradient_weights,
    logistic,
    riemannian_gradient,
)
from .solver import (
    DEFAULT_HYPERPARAMS,
    DESK_HYPERPARAMS,
    Hyperparams,
    InnerRecord,
    InnerRun,
    LineSearchError,
    OuterRecord,
    SolveTrace,
    armijo_search,
    ep_prmgd,
    hyperparams_from_mapping,
    next_tau_init,
    prmgd_inner,
    solve_fixed_polarization,
    solve_sum_objective,
)
from .bench import (
    ExperimentPlan,
    ResultRow,
    derive_seed,
    run_campaign,
    run_single,
    summarize,
    sweep_tradeoff,
)

__version__ = "0.1.0"
