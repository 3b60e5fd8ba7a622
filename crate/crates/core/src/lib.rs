//! Unbiased estimation of linear functionals `theta = int g w` of a boundary
//! curve `g`, observed either through a Poisson point process with intensity
//! `n 1(y >= g(x))` or through fixed-design regression with one-sided noise.
//!
//! The crate provides exact samplers for both models ([`model`]), lower
//! envelope geometry ([`envelope`]), the blockwise, adaptive, Hölder-MLE and
//! monotone-MLE estimators ([`estimators`]), confidence intervals and
//! distributional oracles ([`inference`]) and a seeded Monte Carlo harness
//! ([`harness`]).

pub mod envelope;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod inference;
pub mod model;
pub mod parallel;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
