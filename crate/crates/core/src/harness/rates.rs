use serde::{Deserialize, Serialize};

use super::run::McResult;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Rmse,
    Variance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares fit of `log y = a + b log x`.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("rates", "x and y lengths differ"));
    }
    if xs.len() < 3 {
        return Err(Error::invalid("rates", "need at least 3 grid points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("rates", "values must be positive for a log-log fit"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rates", "x values must not all coincide"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit {
        slope,
        stderr: (ssr / (k - 2.0) / sxx).sqrt(),
        intercept,
        points: xs.len(),
    })
}

/// Log-log slope of an estimator's RMSE or variance against `n`.
pub fn fit_rate(result: &McResult, estimator: &str, quantity: Quantity) -> Result<RateFit> {
    let rows: Vec<_> = result.rows_for(estimator).collect();
    if rows.is_empty() {
        return Err(Error::invalid("estimator", format!("no rows for `{estimator}`")));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| match quantity {
            Quantity::Rmse => r.rmse,
            Quantity::Variance => r.variance,
        })
        .collect();
    fit_log_slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs = [250.0, 500.0, 1000.0, 2000.0, 4000.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powf(-1.5)).collect();
        let fit = fit_log_slope(&xs, &ys).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_log_slope(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_log_slope(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]).is_err());
        assert!(fit_log_slope(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }
}
