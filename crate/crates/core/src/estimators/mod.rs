//! Functional estimators: blockwise, adaptive blockwise, Hölder and monotone
//! maximum likelihood, and cosine-series projections built from them.

mod blockwise;
mod lepski;
mod mle;
mod monotone;
mod report;
mod series;

pub use blockwise::{blockwise_ppp, blockwise_regression, BlockConfig, Intercept};
pub use lepski::{critical_value, default_c, h_function, lepski_select, LepskiConfig};
pub use mle::{mle_hoelder_ppp, mle_hoelder_regression, HoelderMle};
pub use monotone::{mle_monotone_ppp, mle_monotone_regression};
pub use report::{EstimateReport, LepskiTrace};
pub use series::{series_estimator, Observations, SeriesFit, SeriesKind};

use crate::error::{Error, Result};
use crate::model::PointSample;

/// Tracks the tallest band any threshold of an estimator needs.
struct BandCheck<'a> {
    sample: &'a PointSample,
    need: f64,
}

impl<'a> BandCheck<'a> {
    fn new(sample: &'a PointSample) -> Self {
        Self {
            sample,
            need: f64::NEG_INFINITY,
        }
    }

    /// All points with `y <= level` over `[a, b]` must be present.
    fn level(&mut self, a: f64, b: f64, level: f64) {
        if let Some(g) = self.sample.band_boundary() {
            self.need = self.need.max(level - g.lower_bound_on(a, b));
        }
    }

    fn global(&mut self, level: f64) {
        if let Some(g) = self.sample.band_boundary() {
            self.need = self.need.max(level - g.g_min());
        }
    }

    fn finish(self) -> Result<()> {
        match self.sample.band_height() {
            Some(t) if self.need > t => Err(Error::BandExceeded {
                required: self.need,
                available: t,
            }),
            _ => Ok(()),
        }
    }
}
