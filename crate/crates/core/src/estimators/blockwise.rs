use serde::{Deserialize, Serialize};

use super::{BandCheck, EstimateReport};
use crate::envelope::QUAD_TOL;
use crate::error::{Error, Result};
use crate::model::{NoiseModel, PointSample, RegressionSample, WeightFunction};

/// How the block minimum is lifted to an upper bound for `g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intercept {
    /// `R h^beta`
    #[default]
    ClassBased,
    /// `(n h)^-1`
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub h: f64,
    pub beta: f64,
    pub r: f64,
    #[serde(default)]
    pub intercept: Intercept,
}

fn near_integer(v: f64) -> Option<usize> {
    let k = v.round();
    ((v - k).abs() <= 1e-9 * v.abs().max(1.0) && k >= 1.0).then_some(k as usize)
}

impl BlockConfig {
    pub fn new(h: f64, beta: f64, r: f64, intercept: Intercept) -> Result<Self> {
        let cfg = Self { h, beta, r, intercept };
        cfg.blocks()?;
        Ok(cfg)
    }

    /// Number of blocks `1/h`.
    pub fn blocks(&self) -> Result<usize> {
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::invalid("h", format!("must lie in (0,1], got {}", self.h)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0,1], got {}", self.beta)));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::invalid("R", format!("must be nonnegative, got {}", self.r)));
        }
        near_integer(1.0 / self.h).ok_or_else(|| Error::invalid("h", format!("1/h must be an integer, got h = {}", self.h)))
    }

    /// Block length `n h` for a regression design of size `n`.
    pub fn block_len(&self, n: usize) -> Result<usize> {
        let k = self.blocks()?;
        if !n.is_multiple_of(k) {
            return Err(Error::invalid("h", format!("n h must be an integer, got n = {n}, h = {}", self.h)));
        }
        Ok(n / k)
    }

    pub fn intercept_value(&self, n: f64) -> f64 {
        match self.intercept {
            Intercept::ClassBased => self.r * self.h.powf(self.beta),
            Intercept::Adaptive => 1.0 / (n * self.h),
        }
    }
}

/// Blockwise estimator in the point process model.
pub fn blockwise_ppp(sample: &PointSample, cfg: &BlockConfig, w: &WeightFunction) -> Result<EstimateReport> {
    let k_count = cfg.blocks()?;
    let n = sample.intensity();
    let h = 1.0 / k_count as f64;

    let mut pts = sample.points().to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let block_of = |x: f64| ((x * k_count as f64) as usize).min(k_count - 1);

    let mut y_star = vec![f64::INFINITY; k_count];
    for p in &pts {
        let k = block_of(p.x);
        y_star[k] = y_star[k].min(p.y);
    }
    if let Some(k) = y_star.iter().position(|y| y.is_infinite()) {
        return match sample.band_height() {
            Some(t) => Err(Error::BandExceeded {
                required: 2.0 * t,
                available: t,
            }),
            None => Err(Error::EmptyBlock { block: k }),
        };
    }

    let b = cfg.intercept_value(n);
    let tau: Vec<f64> = y_star.iter().map(|y| y + b).collect();
    let mut band = BandCheck::new(sample);
    for (k, &t) in tau.iter().enumerate() {
        band.level(k as f64 * h, (k + 1) as f64 * h, t);
    }
    band.finish()?;

    let mut counts = vec![0usize; k_count];
    let mut corr = vec![0.0; k_count];
    let mut var = 0.0;
    for p in &pts {
        let k = block_of(p.x);
        if p.y <= tau[k] {
            let wx = w.eval(p.x);
            counts[k] += 1;
            corr[k] += wx;
            var += wx * wx;
        }
    }
    let mut total = 0.0;
    let block_values: Vec<f64> = (0..k_count)
        .map(|k| {
            let wbar = w.integral(k as f64 * h, (k + 1) as f64 * h, QUAD_TOL / k_count as f64) / h;
            let v = tau[k] * wbar - corr[k] / (n * h);
            total += v * h;
            v
        })
        .collect();

    let mut rep = EstimateReport::new("blockwise", total);
    rep.threshold_counts = counts;
    rep.variance_estimate = Some(var / (n * n));
    rep.chosen_h = Some(h);
    rep.block_values = block_values;
    Ok(rep)
}

/// Block statistics of the regression estimator at one bandwidth.
pub(crate) struct RegressionBlocks {
    pub theta: f64,
    pub block_values: Vec<f64>,
    pub counts: Vec<usize>,
    /// Whether `Y_i` lies at or below its block threshold.
    pub below: Vec<bool>,
    pub var_sum: f64,
}

pub(crate) fn regression_blocks(ys: &[f64], inv_lambda: f64, len: usize, b: f64, w: &WeightFunction) -> RegressionBlocks {
    let n = ys.len();
    let nf = n as f64;
    let k_count = n / len;
    let mut block_values = Vec::with_capacity(k_count);
    let mut counts = Vec::with_capacity(k_count);
    let mut below = vec![false; n];
    let mut total = 0.0;
    let mut var_sum = 0.0;
    for k in 0..k_count {
        let block = &ys[k * len..(k + 1) * len];
        let tau = block.iter().copied().fold(f64::INFINITY, f64::min) + b;
        let mut acc = 0.0;
        let mut count = 0;
        for (j, &y) in block.iter().enumerate() {
            let i = k * len + j + 1;
            let wx = w.eval(i as f64 / nf);
            let hit = y <= tau;
            let term = y.min(tau) - if hit { inv_lambda } else { 0.0 };
            acc += term * wx;
            if hit {
                count += 1;
                below[i - 1] = true;
                var_sum += wx * wx;
            }
        }
        total += acc;
        block_values.push(acc / len as f64);
        counts.push(count);
    }
    RegressionBlocks {
        theta: total / nf,
        block_values,
        counts,
        below,
        var_sum,
    }
}

/// Blockwise estimator in the fixed-design regression model.
pub fn blockwise_regression(sample: &RegressionSample, noise: &NoiseModel, cfg: &BlockConfig, w: &WeightFunction) -> Result<EstimateReport> {
    let n = sample.n();
    let len = cfg.block_len(n)?;
    let b = cfg.intercept_value(n as f64);
    let inv_lambda = noise.inverse_lambda();
    let blocks = regression_blocks(sample.values(), inv_lambda, len, b, w);
    let mut rep = EstimateReport::new("blockwise", blocks.theta);
    rep.threshold_counts = blocks.counts;
    rep.variance_estimate = Some(blocks.var_sum * (inv_lambda / n as f64).powi(2));
    rep.chosen_h = Some(cfg.h);
    rep.block_values = blocks.block_values;
    Ok(rep)
}
