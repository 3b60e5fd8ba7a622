use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::estimators::HoelderMle;
use crate::inference::self_normalized_ci;
use crate::model::{default_band_height, sample_ppp_from, with_band_extension, BoundaryFunction, WeightFunction};
use crate::parallel::Execution;
use crate::rng::{replicate_stream, Provenance};

use super::spec::default_class_params;

fn default_alpha() -> f64 {
    0.05
}

/// Coverage experiment for the self-normalized MLE interval in the point
/// process model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    pub id: String,
    pub g: String,
    #[serde(default = "weight_default")]
    pub w: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub n: usize,
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_height: Option<f64>,
}

fn weight_default() -> String {
    "const:1".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub spec: CoverageSpec,
    pub replications: usize,
    pub covered: usize,
    /// Intervals with no on-graph observation; counted as not covering.
    pub degenerate: usize,
    pub failures: usize,
    pub coverage: f64,
    /// Exact 95% Clopper-Pearson bounds for the coverage probability.
    pub lower: f64,
    pub upper: f64,
    pub on_graph_mean: f64,
    pub on_graph_per_sqrt_n: f64,
}

/// Two-sided Clopper-Pearson interval for `k` successes in `m` trials.
pub fn clopper_pearson(k: usize, m: usize, confidence: f64) -> (f64, f64) {
    let a = 0.5 * (1.0 - confidence);
    let lower = if k == 0 {
        0.0
    } else {
        Beta::new(k as f64, (m - k + 1) as f64).map_or(0.0, |b| b.inverse_cdf(a))
    };
    let upper = if k == m {
        1.0
    } else {
        Beta::new((k + 1) as f64, (m - k) as f64).map_or(1.0, |b| b.inverse_cdf(1.0 - a))
    };
    (lower, upper)
}

enum Trial {
    Covered(usize),
    Missed(usize),
    Degenerate,
    Failed,
}

pub fn coverage_study(spec: &CoverageSpec, exec: Execution) -> Result<CoverageResult> {
    if !(spec.alpha > 0.0 && spec.alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0,1), got {}", spec.alpha)));
    }
    if spec.replications == 0 {
        return Err(Error::invalid("replications", "must be positive"));
    }
    if spec.n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let g = BoundaryFunction::from_id(&spec.g)?;
    let w = WeightFunction::from_id(&spec.w)?;
    let (cb, cr) = default_class_params(&g).unwrap_or((1.0, 1.0));
    let (beta, r) = (spec.beta.unwrap_or(cb), spec.r.unwrap_or(cr));
    if !(beta > 0.0 && beta <= 1.0 && r > 0.0) {
        return Err(Error::invalid("beta/R", "need beta in (0,1] and R > 0"));
    }
    let nf = spec.n as f64;
    let band = spec.band_height.unwrap_or_else(|| default_band_height(r, nf, nf.powf(-0.5)));
    let theta = g.functional(&w, 1e-10);

    let trials = exec.map(spec.replications, |rep| -> Result<Trial> {
        let prov = Provenance::new(spec.master_seed, replicate_stream(0, rep as u32));
        let (mut sample, mut rng) = sample_ppp_from(&g, nf, band, prov)?;
        let fit = match with_band_extension(&mut sample, &g, &mut rng, |s| HoelderMle::fit_ppp(s, beta, r)) {
            Ok(f) => f,
            Err(e) if e.is_validation() => return Err(e),
            Err(_) => return Ok(Trial::Failed),
        };
        let report = fit.estimate(&w)?;
        let count = fit.on_graph_count();
        Ok(match self_normalized_ci(&report, spec.alpha) {
            Ok(ci) if ci.contains(theta) => Trial::Covered(count),
            Ok(_) => Trial::Missed(count),
            Err(Error::DegenerateInterval) => Trial::Degenerate,
            Err(e) => return Err(e),
        })
    });
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;

    let (mut covered, mut degenerate, mut failures, mut count_sum, mut counted) = (0, 0, 0, 0usize, 0usize);
    for t in &trials {
        match t {
            Trial::Covered(c) => {
                covered += 1;
                count_sum += c;
                counted += 1;
            }
            Trial::Missed(c) => {
                count_sum += c;
                counted += 1;
            }
            Trial::Degenerate => degenerate += 1,
            Trial::Failed => failures += 1,
        }
    }
    let m = spec.replications;
    let (lower, upper) = clopper_pearson(covered, m, 0.95);
    let on_graph_mean = if counted > 0 { count_sum as f64 / counted as f64 } else { 0.0 };
    Ok(CoverageResult {
        spec: spec.clone(),
        replications: m,
        covered,
        degenerate,
        failures,
        coverage: covered as f64 / m as f64,
        lower,
        upper,
        on_graph_mean,
        on_graph_per_sqrt_n: on_graph_mean / nf.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> CoverageSpec {
        CoverageSpec {
            id: "c".into(),
            g: "const:0".into(),
            w: "const:1".into(),
            beta: Some(1.0),
            r: Some(1.0),
            n: 500,
            replications: 200,
            alpha: 0.05,
            master_seed: 9,
            band_height: None,
        }
    }

    #[test]
    fn clopper_pearson_brackets_estimate() {
        let (lo, hi) = clopper_pearson(190, 200, 0.95);
        assert!(lo < 0.95 && 0.95 < hi);
        assert_eq!(clopper_pearson(0, 10, 0.95).0, 0.0);
        assert_eq!(clopper_pearson(10, 10, 0.95).1, 1.0);
        // known value: k = 0, m = 10 upper = 1 - 0.025^(1/10)
        assert!((clopper_pearson(0, 10, 0.95).1 - (1.0 - 0.025f64.powf(0.1))).abs() < 1e-8);
    }

    #[test]
    fn alpha_zero_rejected() {
        let mut s = spec();
        s.alpha = 0.0;
        assert!(coverage_study(&s, Execution::sequential()).is_err());
    }

    #[test]
    fn small_study_runs() {
        let res = coverage_study(&spec(), Execution::default()).unwrap();
        assert!(res.covered + res.degenerate + res.failures <= res.replications);
        assert!(res.coverage > 0.8);
        assert!(res.lower <= res.coverage && res.coverage <= res.upper);
    }
}
