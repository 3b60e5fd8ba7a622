use serde::{Deserialize, Serialize};

use crate::inference::ConfidenceInterval;

/// Per-bandwidth statistics of the adaptive procedure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LepskiTrace {
    pub grid: Vec<f64>,
    pub estimates: Vec<f64>,
    pub critical_values: Vec<f64>,
    /// 0-based index of the selected bandwidth.
    pub selected: usize,
}

/// Output of a functional estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub theta_hat: f64,
    /// Number of observations on the graph of the envelope (MLE family).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_graph_count: Option<usize>,
    /// Observations at or below each block threshold (blockwise family).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub threshold_counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<ConfidenceInterval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_h: Option<f64>,
    /// Per-block estimates `theta_k`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub block_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lepski: Option<LepskiTrace>,
}

impl EstimateReport {
    pub fn new(estimator: impl Into<String>, theta_hat: f64) -> Self {
        Self {
            estimator: estimator.into(),
            theta_hat,
            on_graph_count: None,
            threshold_counts: Vec::new(),
            variance_estimate: None,
            ci: None,
            chosen_h: None,
            block_values: Vec::new(),
            lepski: None,
        }
    }

    /// On-graph count, or the total number of thresholded observations.
    pub fn count(&self) -> usize {
        self.on_graph_count
            .unwrap_or_else(|| self.threshold_counts.iter().sum())
    }

    pub fn sigma_hat(&self) -> Option<f64> {
        self.variance_estimate.map(f64::sqrt)
    }
}
