use super::{BandCheck, EstimateReport};
use crate::envelope::{ConeEnvelope, QUAD_TOL};
use crate::error::{Error, Result};
use crate::model::{NoiseModel, Point, PointSample, RegressionSample, WeightFunction};

#[derive(Clone, Debug)]
enum Design {
    Ppp { n: f64 },
    Regression { inv_lambda: f64, ghat: Vec<f64>, on_graph: Vec<bool> },
}

/// The Hölder-class maximum likelihood envelope together with its on-graph
/// observations. One fit serves any number of weight functions.
#[derive(Clone, Debug)]
pub struct HoelderMle {
    env: ConeEnvelope,
    sites: Vec<Point>,
    /// On-graph sites in abscissa order.
    on_graph: Vec<Point>,
    design: Design,
}

fn on_graph_points(env: &ConeEnvelope, sites: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = env.on_graph_sites().into_iter().map(|i| sites[i]).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts
}

impl HoelderMle {
    /// Fits the cone envelope to a point process sample. For a band sample
    /// the band must reach above the envelope everywhere.
    pub fn fit_ppp(sample: &PointSample, beta: f64, r: f64) -> Result<Self> {
        if sample.is_empty() {
            return match sample.band_height() {
                Some(t) => Err(Error::BandExceeded {
                    required: 2.0 * t,
                    available: t,
                }),
                None => Err(Error::EstimationFailure("no observations".into())),
            };
        }
        let env = ConeEnvelope::build(sample.points(), beta, r)?;
        if let Some(g) = sample.band_boundary() {
            let mut band = BandCheck::new(sample);
            if g.class().implies_hoelder(beta, r) {
                // missing points sit above g + T >= envelope, so their cones never bind
                for (lo, hi, top) in env.piece_maxima() {
                    band.level(lo, hi, top);
                }
            } else {
                let top = env.piece_maxima().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
                band.global(top);
            }
            band.finish()?;
        }
        let sites = sample.points().to_vec();
        Ok(Self {
            on_graph: on_graph_points(&env, &sites),
            env,
            sites,
            design: Design::Ppp { n: sample.intensity() },
        })
    }

    /// Fits the envelope through `(i/n, Y_i)`.
    pub fn fit_regression(sample: &RegressionSample, noise: &NoiseModel, beta: f64, r: f64) -> Result<Self> {
        let n = sample.n();
        let sites: Vec<Point> = (1..=n).map(|i| Point::new(sample.design(i), sample.values()[i - 1])).collect();
        let env = ConeEnvelope::build(&sites, beta, r)?;
        let ghat = env.eval_sorted(sites.iter().map(|p| p.x));
        let mut on_graph = vec![false; n];
        for i in env.on_graph_sites() {
            on_graph[i] = true;
        }
        Ok(Self {
            on_graph: on_graph_points(&env, &sites),
            env,
            sites,
            design: Design::Regression {
                inv_lambda: noise.inverse_lambda(),
                ghat,
                on_graph,
            },
        })
    }

    pub fn envelope(&self) -> &ConeEnvelope {
        &self.env
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.env.eval(x)
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn on_graph_count(&self) -> usize {
        self.on_graph.len()
    }

    pub fn on_graph_points(&self) -> &[Point] {
        &self.on_graph
    }

    pub fn estimate(&self, w: &WeightFunction) -> Result<EstimateReport> {
        let (theta, var) = match &self.design {
            Design::Ppp { n } => {
                let integral = self.env.integrate(w, QUAD_TOL).value;
                let (mut corr, mut sq) = (0.0, 0.0);
                for p in &self.on_graph {
                    let wx = w.eval(p.x);
                    corr += wx;
                    sq += wx * wx;
                }
                (integral - corr / n, sq / (n * n))
            }
            Design::Regression {
                inv_lambda,
                ghat,
                on_graph,
            } => {
                let nf = ghat.len() as f64;
                let (mut acc, mut sq) = (0.0, 0.0);
                for (j, (&g, &on)) in ghat.iter().zip(on_graph).enumerate() {
                    let wx = w.eval((j + 1) as f64 / nf);
                    let corr = if on { *inv_lambda } else { 0.0 };
                    acc += (g - corr) * wx;
                    if on {
                        sq += wx * wx;
                    }
                }
                (acc / nf, sq * (inv_lambda / nf).powi(2))
            }
        };
        let mut rep = EstimateReport::new("mle", theta);
        rep.on_graph_count = Some(self.on_graph.len());
        rep.variance_estimate = Some(var);
        Ok(rep)
    }
}

/// Hölder-class MLE functional estimator in the point process model.
pub fn mle_hoelder_ppp(sample: &PointSample, beta: f64, r: f64, w: &WeightFunction) -> Result<EstimateReport> {
    HoelderMle::fit_ppp(sample, beta, r)?.estimate(w)
}

/// Hölder-class MLE functional estimator in the regression model.
pub fn mle_hoelder_regression(sample: &RegressionSample, noise: &NoiseModel, beta: f64, r: f64, w: &WeightFunction) -> Result<EstimateReport> {
    HoelderMle::fit_regression(sample, noise, beta, r)?.estimate(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_ppp, BoundaryFunction};
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_example() {
        let s = PointSample::from_points(vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)], 4.0).unwrap();
        let rep = mle_hoelder_ppp(&s, 1.0, 2.0, &WeightFunction::constant(1.0)).unwrap();
        assert_abs_diff_eq!(rep.theta_hat, 0.25, epsilon = 1e-14);
        assert_eq!(rep.on_graph_count, Some(2));
        assert_abs_diff_eq!(rep.variance_estimate.unwrap(), 2.0 / 16.0, epsilon = 1e-15);
    }

    #[test]
    fn single_point() {
        let (x0, y0, n, r) = (0.3, 0.7, 50.0, 1.5);
        let s = PointSample::from_points(vec![Point::new(x0, y0)], n).unwrap();
        for beta in [0.5, 1.0] {
            let rep = mle_hoelder_ppp(&s, beta, r, &WeightFunction::constant(1.0)).unwrap();
            let cone = y0 + r * (x0.powf(beta + 1.0) + (1.0f64 - x0).powf(beta + 1.0)) / (beta + 1.0);
            assert_abs_diff_eq!(rep.theta_hat, cone - 1.0 / n, epsilon = 1e-13);
        }
    }

    #[test]
    fn empty_sample() {
        let s = PointSample::from_points(vec![], 10.0).unwrap();
        assert!(matches!(mle_hoelder_ppp(&s, 1.0, 1.0, &WeightFunction::constant(1.0)), Err(Error::EstimationFailure(_))));
    }

    #[test]
    fn band_too_low_is_detected() {
        let g = BoundaryFunction::constant(0.0);
        let s = sample_ppp(&g, 5.0, 0.05, &mut stream_rng(2, 0)).unwrap();
        assert!(matches!(
            mle_hoelder_ppp(&s, 1.0, 1.0, &WeightFunction::constant(1.0)),
            Err(Error::BandExceeded { .. })
        ));
    }

    #[test]
    fn regression_on_graph_matches_definition() {
        let ys = vec![0.5, 0.1, 0.9, 0.12, 0.3];
        let s = RegressionSample::from_values(ys.clone()).unwrap();
        let noise = NoiseModel::exponential(2.0).unwrap();
        let fit = HoelderMle::fit_regression(&s, &noise, 1.0, 1.0).unwrap();
        // Y_i <= min_{i' != i} Y_i' + |i - i'|/5
        let expect: Vec<usize> = (0..5)
            .filter(|&i| (0..5).filter(|&j| j != i).all(|j| ys[i] <= ys[j] + (i as f64 - j as f64).abs() / 5.0))
            .collect();
        assert_eq!(fit.envelope().on_graph_sites(), expect);
        let rep = fit.estimate(&WeightFunction::constant(1.0)).unwrap();
        let ghat: Vec<f64> = (0..5)
            .map(|i| (0..5).map(|j| ys[j] + (i as f64 - j as f64).abs() / 5.0).fold(f64::INFINITY, f64::min))
            .collect();
        let want = (ghat.iter().sum::<f64>() - 0.5 * expect.len() as f64) / 5.0;
        assert_abs_diff_eq!(rep.theta_hat, want, epsilon = 1e-14);
        assert_abs_diff_eq!(rep.variance_estimate.unwrap(), expect.len() as f64 / 100.0, epsilon = 1e-15);
    }
}
