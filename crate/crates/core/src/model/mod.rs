//! Function classes, weights, noise laws and exact samplers for the point
//! process and fixed-design regression models.

mod boundary;
mod noise;
mod sample;
mod weight;

pub use boundary::{BoundaryFunction, FunctionClass};
pub use noise::{NoiseModel, SURVIVAL_FLOOR};
pub use sample::{
    default_band_height, extend_ppp, sample_ppp, sample_ppp_from, sample_regression, sample_regression_from,
    with_band_extension, Coverage, Point, PointSample, RegressionSample,
};
pub use weight::WeightFunction;
