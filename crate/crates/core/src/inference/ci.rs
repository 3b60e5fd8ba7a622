use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::EstimateReport;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    /// Nominal coverage `1 - alpha`.
    pub level: f64,
    pub sigma_hat: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `theta_hat +- z_{1-alpha/2} sigma_hat` with the on-graph self-normalizer.
pub fn self_normalized_ci(report: &EstimateReport, alpha: f64) -> Result<ConfidenceInterval> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0,1], got {alpha}")));
    }
    let var = report
        .variance_estimate
        .ok_or_else(|| Error::invalid("report", "estimator does not provide a variance estimate"))?;
    if report.count() == 0 {
        return Err(Error::DegenerateInterval);
    }
    let sigma = var.max(0.0).sqrt();
    let z = if alpha == 1.0 { 0.0 } else { normal_quantile(1.0 - alpha / 2.0) };
    Ok(ConfidenceInterval {
        lo: report.theta_hat - z * sigma,
        hi: report.theta_hat + z * sigma,
        level: 1.0 - alpha,
        sigma_hat: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn report(theta: f64, count: usize, var: f64) -> EstimateReport {
        let mut r = EstimateReport::new("mle", theta);
        r.on_graph_count = Some(count);
        r.variance_estimate = Some(var);
        r
    }

    #[test]
    fn quantile() {
        assert_abs_diff_eq!(normal_quantile(0.975), 1.959_963_984_540_054, epsilon = 1e-9);
        assert_abs_diff_eq!(normal_quantile(0.5), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn four_unit_weights() {
        // sigma^2 = 4 / 100^2
        let ci = self_normalized_ci(&report(0.3, 4, 4.0 / 1e4), 0.05).unwrap();
        assert_abs_diff_eq!(ci.sigma_hat, 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(ci.hi - 0.3, 0.039_199_3, epsilon = 1e-7);
        assert_abs_diff_eq!(0.5 * (ci.lo + ci.hi), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(ci.level, 0.95, epsilon = 1e-15);
    }

    #[test]
    fn edge_cases() {
        let ci = self_normalized_ci(&report(1.5, 3, 0.01), 1.0).unwrap();
        assert_eq!((ci.lo, ci.hi), (1.5, 1.5));
        assert!(matches!(self_normalized_ci(&report(1.5, 0, 0.0), 0.05), Err(Error::DegenerateInterval)));
        assert!(self_normalized_ci(&report(1.5, 3, 0.01), 0.0).is_err());
        assert!(self_normalized_ci(&report(1.5, 3, 0.01), 1.5).is_err());
    }
}
