use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spec::{EstimatorKind, ExperimentSpec, ModelKind, ResolvedEstimator};
use crate::error::{Error, Result};
use crate::estimators::{
    blockwise_ppp, blockwise_regression, lepski_select, mle_hoelder_ppp, mle_hoelder_regression, mle_monotone_ppp,
    mle_monotone_regression, EstimateReport,
};
use crate::model::{sample_ppp_from, sample_regression_from, with_band_extension, BoundaryFunction, NoiseModel, PointSample, RegressionSample};
use crate::parallel::Execution;
use crate::rng::{replicate_stream, Provenance};

/// Aggregates for one `(estimator, n)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub experiment_id: String,
    pub estimator: String,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub mean_error: f64,
    /// Root mean squared error over the `k` successful replicates, so that
    /// `rmse^2 = mean_error^2 + (k - 1)/k * variance`.
    pub rmse: f64,
    /// Sample variance of the errors (divisor `M - 1` over successful replicates).
    pub variance: f64,
    pub on_graph_mean: f64,
    pub failures: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub estimator: String,
    pub n: usize,
    pub replicate: usize,
    pub theta_hat: Option<f64>,
    pub error: Option<f64>,
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub spec: ExperimentSpec,
    pub rows: Vec<McRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub replicates: Vec<ReplicateRecord>,
}

impl McResult {
    pub fn row(&self, estimator: &str, n: usize) -> Option<&McRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.n == n)
    }

    /// Rows of one estimator in grid order.
    pub fn rows_for<'a>(&'a self, estimator: &'a str) -> impl Iterator<Item = &'a McRow> + 'a {
        self.rows.iter().filter(move |r| r.estimator == estimator)
    }
}

/// Outcome of one estimator on one replicate.
#[derive(Clone, Debug)]
struct Outcome {
    result: std::result::Result<(f64, usize), String>,
    seconds: f64,
}

/// The true functional an estimator targets at size `n`.
pub fn target(model: ModelKind, g: &BoundaryFunction, e: &ResolvedEstimator, n: usize) -> f64 {
    match model {
        ModelKind::Ppp => g.functional(&e.w, 1e-10),
        ModelKind::Regression => g.design_functional(&e.w, n),
    }
}

fn estimate_ppp(sample: &PointSample, e: &ResolvedEstimator, truth: f64) -> Result<EstimateReport> {
    match e.kind {
        EstimatorKind::Blockwise => blockwise_ppp(sample, e.block.as_ref().expect("resolved"), &e.w),
        EstimatorKind::Mle => mle_hoelder_ppp(sample, e.beta, e.r, &e.w),
        EstimatorKind::Monotone => mle_monotone_ppp(sample, &e.w),
        EstimatorKind::TruthStub => Ok(EstimateReport::new("truth-stub", truth)),
        EstimatorKind::Lepski => Err(Error::invalid("kind", "the adaptive estimator is defined for regression only")),
    }
}

fn estimate_regression(sample: &RegressionSample, noise: &NoiseModel, e: &ResolvedEstimator, truth: f64) -> Result<EstimateReport> {
    match e.kind {
        EstimatorKind::Blockwise => blockwise_regression(sample, noise, e.block.as_ref().expect("resolved"), &e.w),
        EstimatorKind::Lepski => lepski_select(sample, noise, &e.w, e.lepski.as_ref().expect("resolved")),
        EstimatorKind::Mle => mle_hoelder_regression(sample, noise, e.beta, e.r, &e.w),
        EstimatorKind::Monotone => mle_monotone_regression(sample, noise, &e.w),
        EstimatorKind::TruthStub => Ok(EstimateReport::new("truth-stub", truth)),
    }
}

struct Cell<'a> {
    spec: &'a ExperimentSpec,
    g: &'a BoundaryFunction,
    noise: &'a NoiseModel,
    resolved: &'a [ResolvedEstimator],
    truths: &'a [f64],
    n_index: usize,
    band: f64,
}

impl Cell<'_> {
    fn replicate(&self, rep: usize) -> Result<Vec<Outcome>> {
        let n = self.spec.n_grid[self.n_index];
        let prov = Provenance::new(self.spec.master_seed, replicate_stream(self.n_index as u32, rep as u32));
        let timed = self.spec.record_timing;
        let run = |f: &mut dyn FnMut() -> Result<EstimateReport>| -> Result<Outcome> {
            let start = timed.then(Instant::now);
            let res = f();
            let seconds = start.map_or(0.0, |s| s.elapsed().as_secs_f64());
            match res {
                Ok(r) => Ok(Outcome {
                    result: Ok((r.theta_hat, r.count())),
                    seconds,
                }),
                Err(e) if e.is_validation() => Err(e),
                Err(e) => Ok(Outcome {
                    result: Err(e.to_string()),
                    seconds,
                }),
            }
        };
        match self.spec.model {
            ModelKind::Ppp => {
                let (mut sample, mut rng) = sample_ppp_from(self.g, n as f64, self.band, prov)?;
                self.resolved
                    .iter()
                    .zip(self.truths)
                    .map(|(e, &truth)| {
                        run(&mut || with_band_extension(&mut sample, self.g, &mut rng, |s| estimate_ppp(s, e, truth)))
                    })
                    .collect()
            }
            ModelKind::Regression => {
                let sample = sample_regression_from(self.g, n, self.noise, prov)?;
                self.resolved
                    .iter()
                    .zip(self.truths)
                    .map(|(e, &truth)| run(&mut || estimate_regression(&sample, self.noise, e, truth)))
                    .collect()
            }
        }
    }
}

/// Accumulates errors in replicate order.
fn aggregate(spec: &ExperimentSpec, name: &str, n: usize, outcomes: &[&Outcome]) -> McRow {
    let m = outcomes.len();
    let ok: Vec<(f64, usize)> = outcomes.iter().filter_map(|o| o.result.as_ref().ok().copied()).collect();
    let k = ok.len() as f64;
    let failures = m - ok.len();
    let seconds = outcomes.iter().map(|o| o.seconds).sum();
    if ok.is_empty() {
        return McRow {
            experiment_id: spec.id.clone(),
            estimator: name.into(),
            n,
            m,
            mean_error: 0.0,
            rmse: 0.0,
            variance: 0.0,
            on_graph_mean: 0.0,
            failures,
            seconds,
        };
    }
    let mean = ok.iter().map(|e| e.0).sum::<f64>() / k;
    let sq = ok.iter().map(|e| e.0 * e.0).sum::<f64>() / k;
    let variance = if ok.len() > 1 {
        ok.iter().map(|e| (e.0 - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    McRow {
        experiment_id: spec.id.clone(),
        estimator: name.into(),
        n,
        m,
        mean_error: mean,
        rmse: sq.sqrt(),
        variance,
        on_graph_mean: ok.iter().map(|e| e.1 as f64).sum::<f64>() / k,
        failures,
        seconds,
    }
}

/// Runs every `(estimator, n)` cell of `spec` with `M` independent replicates.
/// All estimators see the same sample within a replicate.
pub fn run_mc(spec: &ExperimentSpec, exec: Execution) -> Result<McResult> {
    spec.validate()?;
    let g = spec.boundary()?;
    let noise = spec.noise_model()?;
    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    for (n_index, &n) in spec.n_grid.iter().enumerate() {
        let resolved = spec.resolve(n_index)?;
        let truths: Vec<f64> = resolved.iter().map(|e| target(spec.model, &g, e, n)).collect();
        let cell = Cell {
            spec,
            g: &g,
            noise: &noise,
            resolved: &resolved,
            truths: &truths,
            n_index,
            band: spec.band_for(n_index, &resolved),
        };
        let per_rep = exec.map(spec.replications, |rep| cell.replicate(rep));
        let per_rep = per_rep.into_iter().collect::<Result<Vec<_>>>()?;

        for (j, e) in resolved.iter().enumerate() {
            // errors relative to the truth
            let outcomes: Vec<Outcome> = per_rep
                .iter()
                .map(|o| Outcome {
                    result: o[j].result.clone().map(|(t, c)| (t - truths[j], c)),
                    seconds: o[j].seconds,
                })
                .collect();
            let refs: Vec<&Outcome> = outcomes.iter().collect();
            let row = aggregate(spec, &e.name, n, &refs);
            if row.failures * 100 > spec.replications {
                return Err(Error::TooManyFailures {
                    failures: row.failures,
                    total: spec.replications,
                });
            }
            rows.push(row);
            if spec.keep_replicates {
                for (rep, o) in outcomes.iter().enumerate() {
                    replicates.push(ReplicateRecord {
                        estimator: e.name.clone(),
                        n,
                        replicate: rep,
                        theta_hat: o.result.as_ref().ok().map(|(err, _)| err + truths[j]),
                        error: o.result.as_ref().ok().map(|(err, _)| *err),
                        count: o.result.as_ref().ok().map(|(_, c)| *c),
                        failure: o.result.as_ref().err().cloned(),
                    });
                }
            }
        }
    }
    Ok(McResult {
        spec: spec.clone(),
        rows,
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::spec::EstimatorSpec;

    fn spec(model: ModelKind, estimators: Vec<EstimatorSpec>) -> ExperimentSpec {
        ExperimentSpec {
            id: "unit".into(),
            model,
            g: "sqrt".into(),
            noise: "exp:1".into(),
            w: "const:1".into(),
            estimators,
            n_grid: vec![50, 100],
            replications: 20,
            master_seed: 42,
            band_height: None,
            keep_replicates: true,
            record_timing: false,
            output: None,
        }
    }

    #[test]
    fn truth_stub_has_zero_error() {
        let s = spec(ModelKind::Ppp, vec![EstimatorSpec::new("stub", EstimatorKind::TruthStub)]);
        let mut s = s;
        s.replications = 2;
        s.n_grid = vec![50];
        let res = run_mc(&s, Execution::sequential()).unwrap();
        let row = &res.rows[0];
        assert_eq!((row.rmse, row.variance, row.mean_error), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rmse_decomposition() {
        let s = spec(
            ModelKind::Ppp,
            vec![
                EstimatorSpec::new("blockwise", EstimatorKind::Blockwise),
                EstimatorSpec::new("mle", EstimatorKind::Mle),
                EstimatorSpec::new("monotone", EstimatorKind::Monotone),
            ],
        );
        let res = run_mc(&s, Execution::sequential()).unwrap();
        assert_eq!(res.rows.len(), 6);
        for row in &res.rows {
            let m = (row.m - row.failures) as f64;
            let rhs = row.mean_error.powi(2) + (m - 1.0) / m * row.variance;
            assert!((row.rmse.powi(2) - rhs).abs() <= 1e-12 * row.rmse.powi(2).max(1e-300), "{row:?}");
        }
        assert_eq!(res.replicates.len(), 6 * 20);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let s = spec(
            ModelKind::Regression,
            vec![
                EstimatorSpec::new("blockwise", EstimatorKind::Blockwise),
                EstimatorSpec::new("mle", EstimatorKind::Mle),
            ],
        );
        let a = run_mc(&s, Execution::sequential()).unwrap();
        let b = run_mc(&s, Execution::with_threads(8)).unwrap();
        assert_eq!(a, b);
    }
}
