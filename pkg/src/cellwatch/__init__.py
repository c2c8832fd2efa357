"""cellwatch: seeded simulation of crowdsourced under-performing-site detection."""

__version__ = "0.1.0"

from .classifier import ClassifierSpec, predict_labels, reference_working_points, working_point_grid
from .config import ScenarioConfig, load_scenario, scenario_from_dict
from .delivery import (
    DeliveryConfig,
    SurveyAssignment,
    coverage_indicator,
    exact_max_coverage,
    greedy_max_coverage,
    random_delivery,
)
from .detection import (
    DetectionMetrics,
    RankingResult,
    auc_precision_recall,
    compute_metrics,
    detect,
    dissatisfied_visitors,
    precision_recall_at_k,
    rank_sites,
    suggest_xi,
)
from .experiment import (
    RunRecord,
    ScenarioResult,
    run_scenario,
    sweep_gt_density,
    sweep_performance_cloud,
    sweep_xi_mu,
    validation_checks,
    visit_share_curve,
)
from .mobility import (
    MobilityParams,
    VisitMatrix,
    exploration_probability,
    load_visit_matrix,
    preferential_return_choice,
    sample_power_law,
    save_visit_matrix,
    simulate_population,
    simulate_user,
)
from .satisfaction import (
    CalibrationError,
    SatisfactionVector,
    UserProfileParams,
    apply_label_noise,
    calibrate_sigma,
    compute_satisfaction,
    draw_tolerances,
)
from .topology import (
    Box,
    Site,
    Topology,
    TopologyError,
    generate_topology,
    load_topology,
    nearest_site,
    plant_underperforming,
)
