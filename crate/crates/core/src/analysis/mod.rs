//! Accuracy metrics and bound evaluators.

mod bounds;
mod metrics;

pub use bounds::{
    bound_holds, tolerant_slack, c_upsilon, eval_deterministic_bounds, eval_highprob_bounds, eval_theorem6_ratio,
    frequency_threshold, sketch_geometry, Block12, BoundContext, BoundEntry, BoundReport, EntryKind,
    HighProbConfig, ReportSummary, SketchGeometry, BOUND_REL_TOL, HIGHPROB_IDS, PHI11_MAX_COND,
};
pub use metrics::{
    error_curve, l2_norm_ratio, rank_reveal_report, subspace_distance, ErrorPoint, RankRevealReport,
    ORTHONORMAL_TOL,
};
