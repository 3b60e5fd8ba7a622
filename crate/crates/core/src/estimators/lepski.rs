use serde::{Deserialize, Serialize};

use super::blockwise::regression_blocks;
use super::{EstimateReport, LepskiTrace};
use crate::error::{Error, Result};
use crate::model::{NoiseModel, RegressionSample, WeightFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LepskiConfig {
    /// Increasing bandwidths `h_1 < ... < h_M`, each with `1/h` and `n h` integral.
    pub grid: Vec<f64>,
    /// Exponent constant `c`; defaults to [`default_c`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

/// `max(5/lambda, 2) + 0.5`.
pub fn default_c(lambda: f64) -> f64 {
    (5.0 / lambda).max(2.0) + 0.5
}

/// `H_x(y) = -log(1 - 2x|y|)/(2x) - |y|`, with `H_x(0) = 0` and `H_0 = 0`.
pub fn h_function(x: f64, y: f64) -> f64 {
    let ay = y.abs();
    if x == 0.0 || ay == 0.0 {
        return 0.0;
    }
    let u = 2.0 * x * ay;
    if u < 0.1 {
        // sum_{k>=2} u^k / (2 x k), avoids cancellation
        let mut sum = 0.0;
        let mut pow = u;
        for k in 2..60 {
            pow *= u;
            let term = pow / k as f64;
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        return sum / (2.0 * x);
    }
    -(-u).ln_1p() / (2.0 * x) - ay
}

/// Bandwidth index and selection outcome for a regression sample.
struct Grid {
    lens: Vec<usize>,
    c: f64,
}

fn validate(n: usize, noise: &NoiseModel, w: &WeightFunction, cfg: &LepskiConfig) -> Result<Grid> {
    if cfg.grid.is_empty() {
        return Err(Error::invalid("grid", "needs at least one bandwidth"));
    }
    if cfg.grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::invalid("grid", "bandwidths must be strictly increasing"));
    }
    let nf = n as f64;
    let h_floor = nf.ln().powi(2) / nf;
    if cfg.grid[0] < h_floor * (1.0 - 1e-12) {
        return Err(Error::invalid(
            "grid",
            format!("smallest bandwidth {} is below (log n)^2/n = {h_floor}", cfg.grid[0]),
        ));
    }
    let c = cfg.c.unwrap_or_else(|| default_c(noise.lambda()));
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid("c", format!("must be positive, got {c}")));
    }
    let mut lens = Vec::with_capacity(cfg.grid.len());
    for &h in &cfg.grid {
        let k = (1.0 / h).round();
        if !(h > 0.0 && h <= 1.0) || ((1.0 / h) - k).abs() > 1e-9 * k || !n.is_multiple_of(k as usize) {
            return Err(Error::invalid("grid", format!("bandwidth {h} needs integral 1/h and n h")));
        }
        lens.push(n / k as usize);
    }
    let x = (c * nf.ln()).sqrt();
    for (m, &h) in cfg.grid.iter().enumerate() {
        let s = 2.0 * x * h.sqrt();
        for i in 1..=n {
            if s * w.eval(i as f64 / nf).abs() >= 1.0 {
                return Err(Error::CriticalValueDomain { m: m + 1, i });
            }
        }
    }
    Ok(Grid { lens, c })
}

/// `kappa` for one bandwidth given which observations lie below their block thresholds.
fn kappa(below: &[bool], noise: &NoiseModel, w: &WeightFunction, h: f64, c: f64) -> f64 {
    let n = below.len();
    let nf = n as f64;
    let lambda = noise.lambda();
    let x = (c * nf.ln()).sqrt();
    let sh = h.sqrt();
    let h_sum: f64 = below
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(j, _)| h_function(x, sh * w.eval((j + 1) as f64 / nf)))
        .sum();
    let w_l1 = (1..=n).map(|i| w.eval(i as f64 / nf).abs()).sum::<f64>() / nf;
    let cq = noise.quad_const();
    let clog = c * nf.ln();
    h_sum / (nf * lambda * sh) + cq * cq * clog * clog * w_l1 / ((nf * h).powi(2) * lambda) + x / (2.0 * nf * lambda * sh)
}

/// Critical value `kappa` at bandwidth `h` with the adaptive intercept.
pub fn critical_value(sample: &RegressionSample, noise: &NoiseModel, w: &WeightFunction, h: f64, c: f64) -> Result<f64> {
    let cfg = LepskiConfig { grid: vec![h], c: Some(c) };
    let grid = validate(sample.n(), noise, w, &cfg)?;
    let nf = sample.n() as f64;
    let blocks = regression_blocks(sample.values(), noise.inverse_lambda(), grid.lens[0], 1.0 / (nf * h), w);
    Ok(kappa(&blocks.below, noise, w, h, grid.c))
}

/// Adaptive blockwise estimator with Lepski's bandwidth choice.
pub fn lepski_select(sample: &RegressionSample, noise: &NoiseModel, w: &WeightFunction, cfg: &LepskiConfig) -> Result<EstimateReport> {
    let n = sample.n();
    let nf = n as f64;
    let grid = validate(n, noise, w, cfg)?;
    let inv_lambda = noise.inverse_lambda();

    let blocks: Vec<_> = cfg
        .grid
        .iter()
        .zip(&grid.lens)
        .map(|(&h, &len)| regression_blocks(sample.values(), inv_lambda, len, 1.0 / (nf * h), w))
        .collect();
    let estimates: Vec<f64> = blocks.iter().map(|b| b.theta).collect();
    let kappas: Vec<f64> = cfg
        .grid
        .iter()
        .zip(&blocks)
        .map(|(&h, b)| kappa(&b.below, noise, w, h, grid.c))
        .collect();

    let big_m = cfg.grid.len();
    let mut selected = big_m - 1;
    'outer: for m in 0..big_m.saturating_sub(1) {
        for mp in 0..=m {
            if (estimates[mp] - estimates[m + 1]).abs() > kappas[m + 1] + kappas[mp] {
                selected = m;
                break 'outer;
            }
        }
    }

    let chosen = &blocks[selected];
    let mut rep = EstimateReport::new("lepski", chosen.theta);
    rep.threshold_counts = chosen.counts.clone();
    rep.variance_estimate = Some(chosen.var_sum * (inv_lambda / nf).powi(2));
    rep.chosen_h = Some(cfg.grid[selected]);
    rep.block_values = chosen.block_values.clone();
    rep.lepski = Some(LepskiTrace {
        grid: cfg.grid.clone(),
        estimates,
        critical_values: kappas,
        selected,
    });
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{blockwise_regression, BlockConfig, Intercept};
    use crate::model::{sample_regression, BoundaryFunction};
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn h_function_values() {
        assert_eq!(h_function(3.0, 0.0), 0.0);
        assert_eq!(h_function(0.0, 0.2), 0.0);
        assert_abs_diff_eq!(h_function(1.0, 0.1), 0.8f64.ln() / -2.0 - 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(h_function(1.0, 0.1), 0.011_571_775_657_104_9, epsilon = 1e-15);
        // both branches agree near the switch
        for &y in &[0.0049f64, 0.00499999, 0.0050001, 0.0051] {
            let direct = -(1.0 - 20.0 * y).ln() / 20.0 - y;
            assert_abs_diff_eq!(h_function(10.0, y), direct, epsilon = 1e-14);
        }
        // H_x(y) ~ x y^2
        assert_abs_diff_eq!(h_function(2.0, 1e-6) / 1e-12, 2.0, epsilon = 1e-5);
        assert_eq!(h_function(2.0, -0.1), h_function(2.0, 0.1));
    }

    #[test]
    fn single_bandwidth_reduces_to_blockwise() {
        let g = BoundaryFunction::sqrt();
        let noise = NoiseModel::exponential(1.0).unwrap();
        let w = WeightFunction::constant(0.25);
        let s = sample_regression(&g, 2000, &noise, &mut stream_rng(11, 0)).unwrap();
        let rep = lepski_select(&s, &noise, &w, &LepskiConfig { grid: vec![0.05], c: None }).unwrap();
        let cfg = BlockConfig::new(0.05, 1.0, 1.0, Intercept::Adaptive).unwrap();
        let direct = blockwise_regression(&s, &noise, &cfg, &w).unwrap();
        assert_eq!(rep.theta_hat, direct.theta_hat);
        assert_eq!(rep.chosen_h, Some(0.05));
    }

    #[test]
    fn unit_weight_violates_domain_at_desk_scale() {
        let noise = NoiseModel::exponential(1.0).unwrap();
        let s = sample_regression(&BoundaryFunction::constant(0.0), 2000, &noise, &mut stream_rng(1, 0)).unwrap();
        let cfg = LepskiConfig { grid: vec![0.04, 0.05], c: None };
        assert!(matches!(
            lepski_select(&s, &noise, &WeightFunction::constant(1.0), &cfg),
            Err(Error::CriticalValueDomain { m: 1, i: 1 })
        ));
    }

    #[test]
    fn grid_validation() {
        let noise = NoiseModel::exponential(1.0).unwrap();
        let s = RegressionSample::from_values(vec![0.0; 2000]).unwrap();
        let w = WeightFunction::constant(0.1);
        for grid in [vec![], vec![0.05, 0.04], vec![0.001], vec![0.03]] {
            assert!(lepski_select(&s, &noise, &w, &LepskiConfig { grid, c: None }).is_err());
        }
    }

    #[test]
    fn exponential_noise_has_no_quadratic_term() {
        let noise = NoiseModel::exponential(2.0).unwrap();
        let s = RegressionSample::from_values(vec![5.0; 1000]).unwrap();
        let w = WeightFunction::constant(0.2);
        let (h, c) = (0.05, default_c(2.0));
        let k = critical_value(&s, &noise, &w, h, c).unwrap();
        // every observation ties the block minimum
        let nf = 1000.0f64;
        let x = (c * nf.ln()).sqrt();
        let want = nf * h_function(x, h.sqrt() * 0.2) / (nf * 2.0 * h.sqrt()) + x / (2.0 * nf * 2.0 * h.sqrt());
        assert_abs_diff_eq!(k, want, epsilon = 1e-15);
    }
}
