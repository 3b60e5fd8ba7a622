use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::HoelderMle;
use crate::model::{default_band_height, sample_ppp_from, with_band_extension, BoundaryFunction, WeightFunction};
use crate::parallel::Execution;
use crate::rng::{replicate_stream, Provenance};

/// Independent Monte Carlo estimates of both sides of
/// `Var(theta_hat) = (1/n) int E[g_hat - g] w^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceIdentity {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
}

impl VarianceIdentity {
    pub fn combined_se(&self) -> f64 {
        self.lhs_se.hypot(self.rhs_se)
    }
}

/// Mean and standard error of the mean.
fn mean_se(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

#[allow(clippy::too_many_arguments)]
pub fn mle_variance_identity(
    g: &BoundaryFunction,
    beta: f64,
    r: f64,
    w: &WeightFunction,
    n: f64,
    replications: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<VarianceIdentity> {
    let band = default_band_height(r, n, n.powf(-0.5));
    let w2 = w.squared();
    let g_w2 = g.functional(&w2, 1e-11);
    let theta = g.functional(w, 1e-11);
    // group 0 feeds the left side, group 1 the right side
    let draw = |group: u32| {
        exec.map(replications, |rep| -> Result<(f64, f64)> {
            let prov = Provenance::new(master_seed, replicate_stream(group, rep as u32));
            let (mut sample, mut rng) = sample_ppp_from(g, n, band, prov)?;
            let fit = with_band_extension(&mut sample, g, &mut rng, |s| HoelderMle::fit_ppp(s, beta, r))?;
            let est = fit.estimate(w)?.theta_hat - theta;
            let gap = fit.envelope().integrate(&w2, 1e-10).value - g_w2;
            Ok((est, gap))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()
    };
    let left: Vec<f64> = draw(0)?.into_iter().map(|p| p.0).collect();
    let right: Vec<f64> = draw(1)?.into_iter().map(|p| p.1).collect();

    let (mean, _) = mean_se(&left);
    let sq: Vec<f64> = left.iter().map(|e| (e - mean).powi(2)).collect();
    let (lhs_raw, lhs_se) = mean_se(&sq);
    let m = replications as f64;
    let (gap_mean, gap_se) = mean_se(&right);
    Ok(VarianceIdentity {
        lhs: lhs_raw * m / (m - 1.0),
        lhs_se: lhs_se * m / (m - 1.0),
        rhs: gap_mean / n,
        rhs_se: gap_se / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_consistent() {
        let g = BoundaryFunction::constant(0.0);
        let w = WeightFunction::constant(1.0);
        let v = mle_variance_identity(&g, 1.0, 1.0, &w, 100.0, 400, 5, Execution::default()).unwrap();
        assert!(v.lhs > 0.0 && v.rhs > 0.0);
        assert!((v.lhs - v.rhs).abs() < 4.0 * v.combined_se(), "{v:?}");
    }
}
