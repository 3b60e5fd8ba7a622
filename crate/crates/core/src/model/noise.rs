use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to the uniform-noise survival function so `log` stays finite.
pub const SURVIVAL_FLOOR: f64 = 1e-300;

/// One-sided error law with density `lambda` at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum NoiseModel {
    Exponential { lambda: f64 },
    /// Uniform on `[0, 1]`.
    Uniform,
    /// `eps = 0` almost surely, treated as `lambda = infinity`. Only useful for
    /// exercising estimator plumbing.
    Zero,
}

impl NoiseModel {
    pub fn exponential(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(NoiseModel::Exponential { lambda })
    }

    pub fn uniform01() -> Self {
        NoiseModel::Uniform
    }

    /// Parses `exp:lambda`, `uniform` or `zero`.
    pub fn from_id(id: &str) -> Result<Self> {
        match id.split_once(':') {
            Some(("exp", l)) => {
                let lambda: f64 = l.trim().parse().map_err(|_| Error::UnknownId(id.to_string()))?;
                Self::exponential(lambda)
            }
            None if id == "uniform" => Ok(NoiseModel::Uniform),
            None if id == "zero" => Ok(NoiseModel::Zero),
            None if id == "exp" => Self::exponential(1.0),
            _ => Err(Error::UnknownId(id.to_string())),
        }
    }

    pub fn id(&self) -> String {
        match self {
            NoiseModel::Exponential { lambda } => format!("exp:{lambda}"),
            NoiseModel::Uniform => "uniform".into(),
            NoiseModel::Zero => "zero".into(),
        }
    }

    pub fn lambda(&self) -> f64 {
        match *self {
            NoiseModel::Exponential { lambda } => lambda,
            NoiseModel::Uniform => 1.0,
            NoiseModel::Zero => f64::INFINITY,
        }
    }

    /// `1 / lambda`, zero for the degenerate law.
    pub fn inverse_lambda(&self) -> f64 {
        1.0 / self.lambda()
    }

    /// `P(eps > z)`.
    pub fn survival(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 1.0;
        }
        match *self {
            NoiseModel::Exponential { lambda } => (-lambda * z).exp(),
            NoiseModel::Uniform => (1.0 - z).max(SURVIVAL_FLOOR),
            NoiseModel::Zero => 0.0,
        }
    }

    /// `G(z) = lambda z + log survival(z)`, identically zero for exponential noise.
    pub fn g_eps(&self, z: f64) -> f64 {
        match *self {
            NoiseModel::Exponential { .. } => 0.0,
            NoiseModel::Uniform => {
                if z <= 0.0 {
                    0.0
                } else if z < 1.0 {
                    z + (-z).ln_1p()
                } else {
                    z + SURVIVAL_FLOOR.ln()
                }
            }
            NoiseModel::Zero => 0.0,
        }
    }

    /// `C` with `|G(z)| <= C^2 z^2` on `[0, delta]`.
    pub fn quad_const(&self) -> f64 {
        match self {
            NoiseModel::Uniform => 1.0,
            _ => 0.0,
        }
    }

    pub fn delta(&self) -> f64 {
        match self {
            NoiseModel::Uniform => 0.5,
            _ => f64::INFINITY,
        }
    }

    /// Polynomial tail exponent `rho` in `survival(z) <= const (1+z)^-rho`.
    pub fn tail_exponent(&self) -> f64 {
        1.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::Exponential { lambda } => Exp::new(lambda).expect("validated lambda").sample(rng),
            NoiseModel::Uniform => rng.random::<f64>(),
            NoiseModel::Zero => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_has_vanishing_compensator_defect() {
        let e = NoiseModel::exponential(1.0).unwrap();
        assert_eq!(e.g_eps(0.3), 0.0);
        assert_eq!(e.quad_const(), 0.0);
        for k in 0..50 {
            let z = k as f64 * 0.1;
            assert!((e.lambda() * z + e.survival(z).ln() - e.g_eps(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_compensator_defect() {
        let u = NoiseModel::uniform01();
        // 0.5 + ln 0.5
        assert!((u.g_eps(0.5) - (-0.193_147_180_559_945_3)).abs() < 1e-12);
        for k in 1..=50 {
            let z = k as f64 * 0.01;
            assert!(u.g_eps(z).abs() <= u.quad_const().powi(2) * z * z);
            assert!((u.lambda() * z + u.survival(z).ln() - u.g_eps(z)).abs() < 1e-12);
        }
        assert_eq!(u.survival(0.0), 1.0);
        assert_eq!(u.survival(2.0), SURVIVAL_FLOOR);
        assert!(u.g_eps(3.0).is_finite());
    }

    #[test]
    fn survival_is_nonincreasing() {
        for noise in [NoiseModel::exponential(2.0).unwrap(), NoiseModel::Uniform] {
            let mut prev = 1.0;
            for k in 0..200 {
                let s = noise.survival(k as f64 * 0.01);
                assert!(s <= prev);
                prev = s;
            }
        }
    }

    #[test]
    fn invalid_lambda() {
        assert!(NoiseModel::exponential(0.0).is_err());
        assert!(NoiseModel::exponential(-1.0).is_err());
        assert!(NoiseModel::from_id("exp:-2").is_err());
        assert!(NoiseModel::from_id("gauss").is_err());
    }
}
