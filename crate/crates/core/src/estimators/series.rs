use super::{blockwise_ppp, blockwise_regression, BlockConfig, HoelderMle};
use crate::error::{Error, Result};
use crate::model::{BoundaryFunction, NoiseModel, PointSample, RegressionSample, WeightFunction};
use crate::quad;

/// Observations from either model.
#[derive(Clone, Copy, Debug)]
pub enum Observations<'a> {
    Ppp(&'a PointSample),
    Regression(&'a RegressionSample, &'a NoiseModel),
}

/// Coefficient estimator used by [`series_estimator`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesKind {
    Mle { beta: f64, r: f64 },
    Blockwise(BlockConfig),
}

/// Projection estimate `sum_m theta_m phi_m` on the cosine basis.
#[derive(Clone, Debug)]
pub struct SeriesFit {
    coefficients: Vec<f64>,
    basis: Vec<WeightFunction>,
}

impl SeriesFit {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().zip(&self.basis).map(|(c, phi)| c * phi.eval(x)).sum()
    }

    /// `int_0^1 (g_M - g)^2`.
    pub fn l2_error(&self, g: &BoundaryFunction, tol: f64) -> f64 {
        quad::integrate(|x| (self.eval(x) - g.eval(x)).powi(2), 0.0, 1.0, tol).value
    }
}

/// Estimates the first `m` cosine coefficients of `g`.
pub fn series_estimator(obs: Observations<'_>, m: u32, kind: SeriesKind) -> Result<SeriesFit> {
    if m == 0 {
        return Err(Error::invalid("M", "series cutoff must be at least 1"));
    }
    let basis = (1..=m).map(WeightFunction::cosine_basis).collect::<Result<Vec<_>>>()?;
    let coefficients = match kind {
        SeriesKind::Mle { beta, r } => {
            let fit = match obs {
                Observations::Ppp(s) => HoelderMle::fit_ppp(s, beta, r)?,
                Observations::Regression(s, noise) => HoelderMle::fit_regression(s, noise, beta, r)?,
            };
            basis.iter().map(|phi| fit.estimate(phi).map(|r| r.theta_hat)).collect::<Result<Vec<_>>>()?
        }
        SeriesKind::Blockwise(cfg) => basis
            .iter()
            .map(|phi| {
                match obs {
                    Observations::Ppp(s) => blockwise_ppp(s, &cfg, phi),
                    Observations::Regression(s, noise) => blockwise_regression(s, noise, &cfg, phi),
                }
                .map(|r| r.theta_hat)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(SeriesFit { coefficients, basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Point;

    #[test]
    fn zero_cutoff_rejected() {
        let s = PointSample::from_points(vec![Point::new(0.5, 0.0)], 10.0).unwrap();
        assert!(series_estimator(Observations::Ppp(&s), 0, SeriesKind::Mle { beta: 1.0, r: 1.0 }).is_err());
    }

    #[test]
    fn coefficients_match_individual_estimates() {
        let s = PointSample::from_points(vec![Point::new(0.2, 0.1), Point::new(0.6, 0.3), Point::new(0.9, 0.05)], 20.0).unwrap();
        let fit = series_estimator(Observations::Ppp(&s), 3, SeriesKind::Mle { beta: 1.0, r: 1.0 }).unwrap();
        for (k, c) in fit.coefficients().iter().enumerate() {
            let phi = WeightFunction::cosine_basis(k as u32 + 1).unwrap();
            let direct = super::super::mle_hoelder_ppp(&s, 1.0, 1.0, &phi).unwrap().theta_hat;
            assert_eq!(*c, direct);
        }
        let x = 0.37;
        let manual: f64 = (0..3)
            .map(|k| fit.coefficients()[k] * WeightFunction::cosine_basis(k as u32 + 1).unwrap().eval(x))
            .sum();
        assert!((fit.eval(x) - manual).abs() < 1e-15);
    }
}
