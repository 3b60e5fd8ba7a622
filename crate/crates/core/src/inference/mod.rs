//! Confidence intervals, the asymptotic variance constant and exact-law
//! oracles for the Hölder MLE.

mod ci;
mod variance;

pub use ci::{normal_quantile, self_normalized_ci, ConfidenceInterval};
pub use deviation_test::{kolmogorov_survival, ks_against, mle_deviation_law_test, moment_ratio, KsOutcome, MomentRatio, SELF_NORMALIZATION_BOUND};
pub use variance::{asymptotic_variance, AsymptoticVariance};
