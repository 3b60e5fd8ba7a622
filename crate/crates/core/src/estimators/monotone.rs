use super::{BandCheck, EstimateReport};
use crate::envelope::{StepEnvelope, QUAD_TOL};
use crate::error::{Error, Result};
use crate::model::{NoiseModel, Point, PointSample, RegressionSample, WeightFunction};

/// Monotone MLE functional estimator in the point process model.
pub fn mle_monotone_ppp(sample: &PointSample, w: &WeightFunction) -> Result<EstimateReport> {
    if w.is_zero() {
        let mut rep = EstimateReport::new("monotone", 0.0);
        rep.on_graph_count = Some(0);
        rep.variance_estimate = Some(0.0);
        return Ok(rep);
    }
    let (_, b) = w.support();
    let beyond = sample.points().iter().any(|p| p.x >= b);
    if sample.is_empty() || !beyond {
        return match sample.band_height() {
            Some(t) => Err(Error::BandExceeded {
                required: 2.0 * t,
                available: t,
            }),
            None if sample.is_empty() => Err(Error::EstimationFailure("no observations".into())),
            None => Err(Error::Domain(format!("no observation at or beyond the weight support end {b}"))),
        };
    }
    let env = StepEnvelope::build(sample.points())?;
    if let Some(g) = sample.band_boundary() {
        let mut band = BandCheck::new(sample);
        let relevant = env.steps().iter().filter(|s| s.lo <= b);
        if g.class().is_monotone() {
            for s in relevant {
                band.level(s.lo, s.hi, s.value);
            }
        } else {
            band.global(relevant.map(|s| s.value).fold(f64::NEG_INFINITY, f64::max));
        }
        band.finish()?;
    }

    let n = sample.intensity();
    let integral = env.integrate(w, QUAD_TOL)?;
    let mut on: Vec<Point> = env.on_graph_sites().into_iter().map(|i| sample.points()[i]).collect();
    on.sort_by(|a, c| a.x.total_cmp(&c.x).then(a.y.total_cmp(&c.y)));
    let (mut corr, mut sq, mut count) = (0.0, 0.0, 0);
    for p in &on {
        let wx = w.eval(p.x);
        corr += wx;
        sq += wx * wx;
        if p.x <= b {
            count += 1;
        }
    }
    let mut rep = EstimateReport::new("monotone", integral - corr / n);
    rep.on_graph_count = Some(count);
    rep.variance_estimate = Some(sq / (n * n));
    Ok(rep)
}

/// Monotone MLE functional estimator in the regression model.
pub fn mle_monotone_regression(sample: &RegressionSample, noise: &NoiseModel, w: &WeightFunction) -> Result<EstimateReport> {
    let ys = sample.values();
    let n = ys.len();
    let nf = n as f64;
    let inv_lambda = noise.inverse_lambda();
    let mut suffix = f64::INFINITY;
    let mut acc = 0.0;
    let mut sq = 0.0;
    let mut count = 0;
    for i in (0..n).rev() {
        // on-graph: Y_i <= Y_i' for every i' > i
        let on = ys[i] <= suffix;
        suffix = suffix.min(ys[i]);
        let wx = w.eval((i + 1) as f64 / nf);
        acc += (suffix - if on { inv_lambda } else { 0.0 }) * wx;
        if on {
            count += 1;
            sq += wx * wx;
        }
    }
    let mut rep = EstimateReport::new("monotone", acc / nf);
    rep.on_graph_count = Some(count);
    rep.variance_estimate = Some(sq * (inv_lambda / nf).powi(2));
    Ok(rep)
}
