use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::weight::WeightFunction;
use crate::quad;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Shape class a boundary function is known to belong to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum FunctionClass {
    /// `|g(x) - g(y)| <= r |x - y|^beta`.
    Hoelder { beta: f64, r: f64 },
    /// Nondecreasing.
    Monotone,
    Both { beta: f64, r: f64 },
}

impl FunctionClass {
    pub fn hoelder(&self) -> Option<(f64, f64)> {
        match *self {
            FunctionClass::Hoelder { beta, r } | FunctionClass::Both { beta, r } => Some((beta, r)),
            FunctionClass::Monotone => None,
        }
    }

    pub fn is_monotone(&self) -> bool {
        matches!(self, FunctionClass::Monotone | FunctionClass::Both { .. })
    }

    /// Whether membership in this class implies membership in `C^beta(r)` on `[0,1]`.
    pub fn implies_hoelder(&self, beta: f64, r: f64) -> bool {
        match self.hoelder() {
            // |x-y| <= 1, so a larger exponent only tightens the bound
            Some((b, rr)) => b >= beta && rr <= r,
            None => false,
        }
    }
}

/// The true frontier `g` on `[0,1]` together with its class metadata.
#[derive(Clone)]
pub struct BoundaryFunction {
    id: String,
    eval: RealFn,
    derivative: Option<RealFn>,
    class: FunctionClass,
    g_min: f64,
    g_max: f64,
    constant: Option<f64>,
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("id", &self.id)
            .field("class", &self.class)
            .field("g_min", &self.g_min)
            .field("g_max", &self.g_max)
            .finish()
    }
}

impl BoundaryFunction {
    pub fn constant(c: f64) -> Self {
        Self {
            id: format!("const:{c}"),
            eval: Arc::new(move |_| c),
            derivative: Some(Arc::new(|_| 0.0)),
            class: FunctionClass::Both { beta: 1.0, r: 0.0 },
            g_min: c,
            g_max: c,
            constant: Some(c),
        }
    }

    /// `g(x) = sqrt(x)`, 1/2-Hölder with constant 1 and increasing.
    pub fn sqrt() -> Self {
        Self {
            id: "sqrt".into(),
            eval: Arc::new(|x: f64| x.max(0.0).sqrt()),
            derivative: Some(Arc::new(|x: f64| 0.5 / x.sqrt())),
            class: FunctionClass::Both { beta: 0.5, r: 1.0 },
            g_min: 0.0,
            g_max: 1.0,
            constant: None,
        }
    }

    /// `g(x) = 0.5 sin(2 pi x) + 4x`, increasing and Lipschitz with constant `4 + pi`.
    pub fn sine_ramp() -> Self {
        use std::f64::consts::PI;
        Self {
            id: "sin4x".into(),
            eval: Arc::new(|x: f64| 0.5 * (2.0 * PI * x).sin() + 4.0 * x),
            derivative: Some(Arc::new(|x: f64| PI * (2.0 * PI * x).cos() + 4.0)),
            class: FunctionClass::Both {
                beta: 1.0,
                r: 4.0 + PI,
            },
            g_min: 0.0,
            g_max: 4.0,
            constant: None,
        }
    }

    /// `g(x) = intercept + slope * x`.
    pub fn linear(intercept: f64, slope: f64) -> Self {
        let class = if slope >= 0.0 {
            FunctionClass::Both {
                beta: 1.0,
                r: slope,
            }
        } else {
            FunctionClass::Hoelder {
                beta: 1.0,
                r: -slope,
            }
        };
        let (lo, hi) = if slope >= 0.0 {
            (intercept, intercept + slope)
        } else {
            (intercept + slope, intercept)
        };
        Self {
            id: format!("linear:{intercept}:{slope}"),
            eval: Arc::new(move |x| intercept + slope * x),
            derivative: Some(Arc::new(move |_| slope)),
            class,
            g_min: lo,
            g_max: hi,
            constant: None,
        }
    }

    /// Arbitrary closed-form boundary. `g_min`/`g_max` must bound `f` on `[0,1]`.
    pub fn custom<F>(id: impl Into<String>, f: F, class: FunctionClass, g_min: f64, g_max: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(g_min.is_finite() && g_max.is_finite() && g_min <= g_max) {
            return Err(Error::invalid("g_min/g_max", "must be finite with g_min <= g_max"));
        }
        Ok(Self {
            id: id.into(),
            eval: Arc::new(f),
            derivative: None,
            class,
            g_min,
            g_max,
            constant: None,
        })
    }

    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    /// Parses a registry identifier: `const:c`, `sqrt`, `sin4x`, `linear:a:b`.
    pub fn from_id(id: &str) -> Result<Self> {
        let mut parts = id.split(':');
        let head = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let num = |s: &str| -> Result<f64> { s.trim().parse::<f64>().map_err(|_| Error::UnknownId(id.to_string())) };
        match (head, args.as_slice()) {
            ("const", [c]) => Ok(Self::constant(num(c)?)),
            ("sqrt", []) => Ok(Self::sqrt()),
            ("sin4x", []) => Ok(Self::sine_ramp()),
            ("linear", [a, b]) => Ok(Self::linear(num(a)?, num(b)?)),
            _ => Err(Error::UnknownId(id.to_string())),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(x))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn class(&self) -> FunctionClass {
        self.class
    }

    pub fn g_min(&self) -> f64 {
        self.g_min
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn constant_value(&self) -> Option<f64> {
        self.constant
    }

    /// A certified lower bound for `min_{x in [a,b]} g(x)`.
    pub fn lower_bound_on(&self, a: f64, b: f64) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        let (a, b) = (a.clamp(0.0, 1.0), b.clamp(0.0, 1.0));
        let mut best = self.g_min;
        if self.class.is_monotone() {
            best = best.max(self.eval(a));
        }
        if let Some((beta, r)) = self.class.hoelder() {
            let mid = 0.5 * (a + b);
            best = best.max(self.eval(mid) - r * (0.5 * (b - a)).powf(beta));
        }
        best
    }

    /// `theta = int_0^1 g w`.
    pub fn functional(&self, w: &WeightFunction, tol: f64) -> f64 {
        let (lo, hi) = w.support();
        let mut breaks = w.break_points();
        breaks.push(0.5 * (lo + hi));
        quad::integrate_with_breaks(|x| self.eval(x) * w.eval(x), lo, hi, &breaks, tol).value
    }

    /// `theta^(n) = (1/n) sum_{i=1}^n g(i/n) w(i/n)`.
    pub fn design_functional(&self, w: &WeightFunction, n: usize) -> f64 {
        let nf = n as f64;
        (1..=n)
            .map(|i| {
                let x = i as f64 / nf;
                self.eval(x) * w.eval(x)
            })
            .sum::<f64>()
            / nf
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn check_class(g: &BoundaryFunction) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            let gx = g.eval(x);
            assert!(gx >= g.g_min() - 1e-12 && gx <= g.g_max() + 1e-12, "{}", g.id());
            if let Some((beta, r)) = g.class().hoelder() {
                assert!((gx - g.eval(y)).abs() <= r * (x - y).abs().powf(beta) + 1e-12, "{}", g.id());
            }
            if g.class().is_monotone() && x < y {
                assert!(gx <= g.eval(y) + 1e-15, "{}", g.id());
            }
            let lb = g.lower_bound_on(x.min(y), x.max(y));
            let grid_min = (0..=50)
                .map(|k| g.eval(x.min(y) + (x - y).abs() * k as f64 / 50.0))
                .fold(f64::INFINITY, f64::min);
            assert!(lb <= grid_min + 1e-12, "{}", g.id());
        }
    }

    #[test]
    fn registry_functions_respect_their_class() {
        for id in ["const:0", "const:-1.5", "sqrt", "sin4x", "linear:0:1", "linear:1:-2"] {
            check_class(&BoundaryFunction::from_id(id).unwrap());
        }
    }

    #[test]
    fn unknown_ids_are_rejected() {
        assert!(matches!(BoundaryFunction::from_id("cube"), Err(Error::UnknownId(_))));
        assert!(matches!(BoundaryFunction::from_id("const:x"), Err(Error::UnknownId(_))));
    }

    #[test]
    fn functionals() {
        let w = WeightFunction::constant(1.0);
        assert!((BoundaryFunction::sqrt().functional(&w, 1e-12) - 2.0 / 3.0).abs() < 1e-10);
        assert!((BoundaryFunction::sine_ramp().functional(&w, 1e-12) - 2.0).abs() < 1e-10);
        let lin = BoundaryFunction::linear(0.0, 1.0);
        // (1/n) sum i/n = (n+1)/(2n)
        assert!((lin.design_functional(&w, 10) - 0.55).abs() < 1e-15);
    }
}
