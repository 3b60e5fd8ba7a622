use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{BlockConfig, Intercept, LepskiConfig};
use crate::model::{default_band_height, BoundaryFunction, NoiseModel, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ppp,
    Regression,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Blockwise,
    Lepski,
    Mle,
    Monotone,
    /// Returns the true functional; exercises the aggregation path.
    TruthStub,
}

/// One estimator in an experiment. Unset class parameters default to the
/// boundary's registry values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSpec {
    pub name: String,
    pub kind: EstimatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Fixed bandwidth; the oracle bandwidth when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default)]
    pub intercept: Intercept,
    /// Weight override for this estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    /// Lepski grids, one per entry of `n_grid`. Built automatically when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lepski_grids: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl EstimatorSpec {
    pub fn new(name: impl Into<String>, kind: EstimatorKind) -> Self {
        Self {
            name: name.into(),
            kind,
            beta: None,
            r: None,
            h: None,
            intercept: Intercept::ClassBased,
            w: None,
            lepski_grids: None,
            c: None,
        }
    }
}

fn default_noise() -> String {
    "exp:1".into()
}

fn default_weight() -> String {
    "const:1".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub id: String,
    pub model: ModelKind,
    pub g: String,
    #[serde(default = "default_noise")]
    pub noise: String,
    #[serde(default = "default_weight")]
    pub w: String,
    pub estimators: Vec<EstimatorSpec>,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    /// Initial band height for point process samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_height: Option<f64>,
    #[serde(default)]
    pub keep_replicates: bool,
    /// Record wall time per row. Off by default so output is reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// Default `(beta, R)` for a registry boundary.
pub fn default_class_params(g: &BoundaryFunction) -> Option<(f64, f64)> {
    if g.id() == "sin4x" {
        return Some((1.0, 8.0));
    }
    g.class().hoelder().map(|(b, r)| (b, r.max(1.0)))
}

/// `(2 beta R n)^{-1/(beta+1)}` rounded to a bandwidth with integral `1/h`
/// (and integral `n h` when `divisor_of` is given).
pub fn oracle_bandwidth(beta: f64, r: f64, n: usize, divisor_of: Option<usize>) -> f64 {
    let h = (2.0 * beta * r * n as f64).powf(-1.0 / (beta + 1.0));
    let target = (1.0 / h).max(1.0);
    let k = match divisor_of {
        None => target.round().max(1.0) as usize,
        Some(m) => (1..=m)
            .filter(|k| m % k == 0)
            .min_by(|a, b| {
                let da = ((*a as f64) / target).ln().abs();
                let db = ((*b as f64) / target).ln().abs();
                da.total_cmp(&db)
            })
            .unwrap_or(1),
    };
    1.0 / k as f64
}

/// Approximately geometric grid of admissible bandwidths for a regression
/// sample of size `n`, from `(log n)^2/n` up to `h_max`.
pub fn auto_lepski_grid(n: usize, h_max: f64) -> Vec<f64> {
    let nf = n as f64;
    let h_floor = nf.ln().powi(2) / nf;
    let mut ks: Vec<usize> = (1..=n).filter(|k| n.is_multiple_of(*k)).collect();
    ks.sort_unstable_by(|a, b| b.cmp(a));
    let mut grid: Vec<f64> = Vec::new();
    for k in ks {
        let h = 1.0 / k as f64;
        if h < h_floor || h > h_max {
            continue;
        }
        if grid.last().is_none_or(|&last| h >= 1.2 * last) {
            grid.push(h);
        }
    }
    grid
}

/// An estimator spec with every parameter resolved for one `n`.
#[derive(Clone, Debug)]
pub struct ResolvedEstimator {
    pub name: String,
    pub kind: EstimatorKind,
    pub beta: f64,
    pub r: f64,
    pub block: Option<BlockConfig>,
    pub lepski: Option<LepskiConfig>,
    pub w: WeightFunction,
}

impl ExperimentSpec {
    pub fn boundary(&self) -> Result<BoundaryFunction> {
        BoundaryFunction::from_id(&self.g)
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        NoiseModel::from_id(&self.noise)
    }

    pub fn weight(&self) -> Result<WeightFunction> {
        WeightFunction::from_id(&self.w)
    }

    /// Resolves every estimator for grid point `n_index`.
    pub fn resolve(&self, n_index: usize) -> Result<Vec<ResolvedEstimator>> {
        let n = self.n_grid[n_index];
        let g = self.boundary()?;
        let base_w = self.weight()?;
        let class = default_class_params(&g);
        self.estimators
            .iter()
            .map(|e| {
                let (beta, r) = match (e.beta, e.r, class) {
                    (Some(b), Some(r), _) => (b, r),
                    (b, r, Some((cb, cr))) => (b.unwrap_or(cb), r.unwrap_or(cr)),
                    (b, r, None) => (b.unwrap_or(1.0), r.unwrap_or(1.0)),
                };
                let w = match &e.w {
                    Some(id) => WeightFunction::from_id(id)?,
                    None if e.kind == EstimatorKind::Monotone && self.model == ModelKind::Ppp && base_w.support().1 >= 1.0 => {
                        let c = base_w.eval(0.5);
                        let (lo, _) = base_w.support();
                        match self.w.split(':').next() {
                            Some("const") | Some("box") | Some("indicator") => WeightFunction::constant_on(c, lo, 0.9)?,
                            _ => {
                                return Err(Error::invalid(
                                    format!("estimators.{}.w", e.name),
                                    "the monotone estimator needs a weight supported away from 1",
                                ))
                            }
                        }
                    }
                    None => base_w.clone(),
                };
                let divisor = (self.model == ModelKind::Regression).then_some(n);
                let block = match e.kind {
                    EstimatorKind::Blockwise => {
                        let h = e.h.unwrap_or_else(|| oracle_bandwidth(beta, r, n, divisor));
                        let cfg = BlockConfig::new(h, beta, r, e.intercept)
                            .map_err(|err| Error::invalid(format!("estimators.{}.h", e.name), err.to_string()))?;
                        if let Some(m) = divisor {
                            cfg.block_len(m)
                                .map_err(|err| Error::invalid(format!("estimators.{}.h", e.name), err.to_string()))?;
                        }
                        Some(cfg)
                    }
                    _ => None,
                };
                let lepski = match e.kind {
                    EstimatorKind::Lepski => {
                        let grid = match &e.lepski_grids {
                            Some(grids) => grids.get(n_index).cloned().ok_or_else(|| {
                                Error::invalid(format!("estimators.{}.lepski_grids", e.name), "needs one grid per n")
                            })?,
                            None => auto_lepski_grid(n, 0.25),
                        };
                        Some(LepskiConfig { grid, c: e.c })
                    }
                    _ => None,
                };
                Ok(ResolvedEstimator {
                    name: e.name.clone(),
                    kind: e.kind,
                    beta,
                    r,
                    block,
                    lepski,
                    w,
                })
            })
            .collect()
    }

    /// Initial band height for point process samples at grid point `n_index`.
    pub fn band_for(&self, n_index: usize, resolved: &[ResolvedEstimator]) -> f64 {
        if let Some(t) = self.band_height {
            return t;
        }
        let n = self.n_grid[n_index] as f64;
        let r = resolved.iter().map(|e| e.r).fold(1.0, f64::max);
        let h_min = resolved
            .iter()
            .map(|e| e.block.map_or(n.powf(-0.5), |b| b.h))
            .fold(1.0, f64::min);
        default_band_height(r, n, h_min)
    }

    /// Checks the spec against every grid point before any sampling.
    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::invalid("replications", "need at least 2"));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(Error::invalid("n_grid", "needs at least one positive n"));
        }
        if self.n_grid.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::invalid("n_grid", "must be strictly increasing"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("estimators", "at least one estimator is required"));
        }
        let mut names: Vec<&str> = self.estimators.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::invalid("estimators", "names must be unique"));
        }
        let g = self.boundary()?;
        self.noise_model()?;
        self.weight()?;
        if let Some(t) = self.band_height {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("band_height", "must be positive"));
            }
        }
        for idx in 0..self.n_grid.len() {
            let resolved = self.resolve(idx)?;
            let n = self.n_grid[idx] as f64;
            for e in &resolved {
                let field = |f: &str| format!("estimators.{}.{f}", e.name);
                if !(e.beta > 0.0 && e.beta <= 1.0) {
                    return Err(Error::invalid(field("beta"), format!("must lie in (0,1], got {}", e.beta)));
                }
                if !(e.r > 0.0 && e.r.is_finite()) {
                    return Err(Error::invalid(field("r"), format!("must be positive, got {}", e.r)));
                }
                match (e.kind, self.model) {
                    (EstimatorKind::Lepski, ModelKind::Ppp) => {
                        return Err(Error::invalid(field("kind"), "the adaptive estimator is defined for regression only"));
                    }
                    (EstimatorKind::Monotone, _) if !g.class().is_monotone() => {
                        return Err(Error::invalid(field("kind"), format!("boundary `{}` is not monotone", g.id())));
                    }
                    (EstimatorKind::Monotone, ModelKind::Ppp) if e.w.support().1 >= 1.0 && !e.w.is_zero() => {
                        return Err(Error::invalid(field("w"), "support must end before 1"));
                    }
                    (EstimatorKind::Blockwise, ModelKind::Ppp) => {
                        let h = e.block.map_or(1.0, |b| b.h);
                        let t = self.band_for(idx, &resolved);
                        if n * h * t < 5.0 {
                            return Err(Error::invalid(field("h"), format!("n h T = {} is below 5", n * h * t)));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            id: "t".into(),
            model: ModelKind::Regression,
            g: "sqrt".into(),
            noise: default_noise(),
            w: default_weight(),
            estimators: vec![EstimatorSpec::new("blockwise", EstimatorKind::Blockwise)],
            n_grid: vec![50, 100],
            replications: 10,
            master_seed: 1,
            band_height: None,
            keep_replicates: false,
            record_timing: false,
            output: None,
        }
    }

    #[test]
    fn oracle_bandwidth_rounding() {
        // (2 * 1 * 1 * 10000)^{-1/2} = 1/141.4
        assert_eq!(oracle_bandwidth(1.0, 1.0, 10_000, None), 1.0 / 141.0);
        let h = oracle_bandwidth(1.0, 1.0, 10_000, Some(10_000));
        assert_eq!(10_000 % (1.0 / h).round() as usize, 0);
        assert_eq!(h, 1.0 / 125.0);
    }

    #[test]
    fn auto_grid_is_admissible() {
        for n in [2000, 8000, 6400] {
            let grid = auto_lepski_grid(n, 0.25);
            assert!(grid.len() >= 3, "{n}: {grid:?}");
            let floor = (n as f64).ln().powi(2) / n as f64;
            assert!(grid[0] >= floor);
            for &h in &grid {
                assert_eq!(n % (1.0 / h).round() as usize, 0);
            }
        }
    }

    #[test]
    fn validation_names_the_field() {
        assert!(spec().validate().is_ok());
        let mut s = spec();
        s.replications = 1;
        assert!(s.validate().is_err());
        let mut s = spec();
        s.n_grid = vec![100, 50];
        assert!(s.validate().is_err());
        let mut s = spec();
        s.estimators[0].h = Some(0.3);
        match s.validate() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "estimators.blockwise.h"),
            other => panic!("{other:?}"),
        }
        let mut s = spec();
        s.g = "cube".into();
        assert!(matches!(s.validate(), Err(Error::UnknownId(_))));
        let mut s = spec();
        s.model = ModelKind::Ppp;
        s.estimators = vec![EstimatorSpec::new("lepski", EstimatorKind::Lepski)];
        assert!(s.validate().is_err());
    }

    #[test]
    fn monotone_default_weight_in_ppp() {
        let mut s = spec();
        s.model = ModelKind::Ppp;
        s.estimators = vec![EstimatorSpec::new("monotone", EstimatorKind::Monotone)];
        let r = s.resolve(0).unwrap();
        assert_eq!(r[0].w.support(), (0.0, 0.9));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn json_defaults() {
        let s: ExperimentSpec = serde_json::from_str(
            r#"{"id":"x","model":"ppp","g":"sin4x","estimators":[{"name":"mle","kind":"mle"}],
                "n_grid":[50],"replications":5,"master_seed":3}"#,
        )
        .unwrap();
        assert_eq!(s.noise, "exp:1");
        assert_eq!(s.w, "const:1");
        assert!(!s.record_timing);
        let r = s.resolve(0).unwrap();
        assert_eq!((r[0].beta, r[0].r), (1.0, 8.0));
    }
}
