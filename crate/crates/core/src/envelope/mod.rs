//! Lower envelopes of observation clouds: Hölder cone envelopes and monotone
//! suffix-minimum steps.

mod cone;
mod deviation;
mod step;

pub use cone::{cone_on_graph_flags, ConeEnvelope, Piece};
pub use deviation::{constant_exponent, deviation_exponent, deviation_moments, envelope_deviation_survival};
pub use step::{Step, StepEnvelope};

/// Default absolute tolerance for envelope integrals.
pub const QUAD_TOL: f64 = 1e-9;
