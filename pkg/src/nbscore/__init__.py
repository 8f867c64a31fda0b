"""Integer risk scoring systems trained for weighted net benefit."""

from .bounds import (
    EnvelopeQuery,
    a_k,
    aunbc_bounds,
    aunbc_lower,
    aunbc_upper,
    auroc_lower,
    b_k,
    envelope_curve,
    generalization_margin,
    p_cumulative,
)
from .calibration import (
    RepairReport,
    RiskAssignment,
    assign_risk_levels,
    improve_aunbc,
    improve_aunbc_until_stable,
)
from .core import (
    BinaryDataset,
    ConfigError,
    ConfusionCurve,
    DataError,
    ScoreModel,
    SolverConfig,
    ThresholdGrid,
    validate_dataset,
)
from .cv import CvPlan, CvReport, fold_assignment, run_cv
from .data import BinarizationSpec, ColumnRule, ingest_csv
from .metrics import (
    BinStats,
    HLResult,
    aunbc,
    auroc_binned,
    bin_stats,
    confusion_at_thresholds,
    confusion_from_scores,
    ece,
    hl_statistic,
    metric_report,
    net_benefit,
    net_benefit_curve,
    weighted_objective,
)
from .milp import MilpExport, expected_counts, milp_export, verify_solution
from .report import emit_curves, emit_scorecard, scorecard
from .solver import (
    TrainResult,
    build_model,
    exact_enumerate,
    find_optimal_t,
    predict,
    predict_many,
    round_real_model,
    sa_train,
)
from .synthetic import boundary_plan, make_rng, synth_boundary, synth_correlated

__version__ = "0.1.0"
