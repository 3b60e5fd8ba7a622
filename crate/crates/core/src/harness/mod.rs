//! Seeded Monte Carlo experiments: replicate loops, aggregation, rate fits,
//! coverage studies and file output.

mod coverage;
mod emit;
mod identity;
mod rates;
mod run;
mod spec;

pub use coverage::{clopper_pearson, coverage_study, CoverageResult, CoverageSpec};
pub use emit::{emit, read_json, write_csv, write_json, write_json_value, Format, CSV_HEADER};
pub use identity::{mle_variance_identity, VarianceIdentity};
pub use rates::{fit_log_slope, fit_rate, Quantity, RateFit};
pub use run::{run_mc, target, McResult, McRow, ReplicateRecord};
pub use spec::{
    auto_lepski_grid, default_class_params, oracle_bandwidth, EstimatorKind, EstimatorSpec, ExperimentSpec, ModelKind,
    ResolvedEstimator,
};
