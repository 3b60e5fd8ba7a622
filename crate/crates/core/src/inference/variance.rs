use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundaryFunction, WeightFunction};
use crate::quad;

const GRID: usize = 1000;

/// Limit of `n^{3/2} Var(theta_hat)` for the Hölder MLE with `beta = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVariance {
    pub value: f64,
    /// `(x, sqrt((R^2 - g'(x)^2)/R) w(x)^2)` on an equispaced grid.
    pub samples: Vec<(f64, f64)>,
}

/// `(sqrt(pi)/2) int sqrt((R^2 - g'^2)/R) w^2`.
pub fn asymptotic_variance(g: &BoundaryFunction, r: f64, w: &WeightFunction, tol: f64) -> Result<AsymptoticVariance> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("R", format!("must be positive, got {r}")));
    }
    if !g.has_derivative() {
        return Err(Error::invalid("g", format!("`{}` has no derivative evaluator", g.id())));
    }
    let dg = |x: f64| g.derivative(x).unwrap_or(f64::NAN);
    for k in 0..=GRID {
        let x = k as f64 / GRID as f64;
        let d = dg(x);
        if d.is_finite() && d.abs() > r * (1.0 + 1e-12) {
            return Err(Error::ClassViolation(format!("|g'({x})| = {} exceeds R = {r}", d.abs())));
        }
    }
    let integrand = |x: f64| {
        let d = dg(x);
        let wx = w.eval(x);
        ((r * r - d * d).max(0.0) / r).sqrt() * wx * wx
    };
    let (lo, hi) = w.support();
    let value = 0.5 * std::f64::consts::PI.sqrt() * quad::integrate_with_breaks(integrand, lo, hi, &w.break_points(), tol).value;
    let samples = (0..=100)
        .map(|k| {
            let x = k as f64 / 100.0;
            (x, integrand(x))
        })
        .collect();
    Ok(AsymptoticVariance { value, samples })
}
