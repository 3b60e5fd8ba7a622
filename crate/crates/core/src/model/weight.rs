use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{self, Quadrature};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Constant(f64),
    /// `sqrt(2) cos(pi k x)` for `k >= 1`.
    Cosine(u32),
    Custom(RealFn),
}

/// Weight `w` defining the functional `theta = int g w`.
#[derive(Clone)]
pub struct WeightFunction {
    id: String,
    shape: Shape,
    support: (f64, f64),
    sup_norm: f64,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("id", &self.id)
            .field("support", &self.support)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl WeightFunction {
    pub fn constant(c: f64) -> Self {
        Self {
            id: format!("const:{c}"),
            shape: Shape::Constant(c),
            support: (0.0, 1.0),
            sup_norm: c.abs(),
        }
    }

    /// `c` on `[a, b]`, zero elsewhere.
    pub fn constant_on(c: f64, a: f64, b: f64) -> Result<Self> {
        check_support(a, b)?;
        Ok(Self {
            id: format!("box:{c}:{a}:{b}"),
            shape: Shape::Constant(c),
            support: (a, b),
            sup_norm: c.abs(),
        })
    }

    /// The `m`-th element (`m >= 1`) of the cosine basis: `phi_1 = 1`,
    /// `phi_{m+1}(x) = sqrt(2) cos(pi m x)`.
    pub fn cosine_basis(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m", "cosine basis is indexed from 1"));
        }
        if m == 1 {
            let mut w = Self::constant(1.0);
            w.id = "cos-basis:1".into();
            return Ok(w);
        }
        Ok(Self {
            id: format!("cos-basis:{m}"),
            shape: Shape::Cosine(m - 1),
            support: (0.0, 1.0),
            sup_norm: std::f64::consts::SQRT_2,
        })
    }

    pub fn custom<F>(id: impl Into<String>, f: F, support: (f64, f64), sup_norm: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_support(support.0, support.1)?;
        if !(sup_norm.is_finite() && sup_norm >= 0.0) {
            return Err(Error::invalid("sup_norm", "must be finite and nonnegative"));
        }
        Ok(Self {
            id: id.into(),
            shape: Shape::Custom(Arc::new(f)),
            support,
            sup_norm,
        })
    }

    /// Parses `const:c`, `box:c:a:b`, `indicator:a:b` or `cos-basis:m`.
    pub fn from_id(id: &str) -> Result<Self> {
        let mut parts = id.split(':');
        let head = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let num = |s: &str| -> Result<f64> { s.trim().parse::<f64>().map_err(|_| Error::UnknownId(id.to_string())) };
        match (head, args.as_slice()) {
            ("const", [c]) => Ok(Self::constant(num(c)?)),
            ("box", [c, a, b]) => Self::constant_on(num(c)?, num(a)?, num(b)?),
            ("indicator", [a, b]) => {
                let mut w = Self::constant_on(1.0, num(a)?, num(b)?)?;
                w.id = id.to_string();
                Ok(w)
            }
            ("cos-basis", [m]) => {
                let m: u32 = m.trim().parse().map_err(|_| Error::UnknownId(id.to_string()))?;
                Self::cosine_basis(m)
            }
            _ => Err(Error::UnknownId(id.to_string())),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, Shape::Constant(c) if c == 0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            return 0.0;
        }
        match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Cosine(k) => std::f64::consts::SQRT_2 * (std::f64::consts::PI * f64::from(*k) * x).cos(),
            Shape::Custom(f) => f(x),
        }
    }

    /// Points where `w` may be discontinuous.
    pub fn break_points(&self) -> Vec<f64> {
        vec![self.support.0, self.support.1]
    }

    /// `w^2` as a weight function.
    pub fn squared(&self) -> WeightFunction {
        match &self.shape {
            Shape::Constant(c) => WeightFunction {
                id: format!("({})^2", self.id),
                shape: Shape::Constant(c * c),
                support: self.support,
                sup_norm: c * c,
            },
            _ => {
                let inner = self.clone();
                WeightFunction {
                    id: format!("({})^2", self.id),
                    shape: Shape::Custom(Arc::new(move |x| {
                        let v = inner.eval(x);
                        v * v
                    })),
                    support: self.support,
                    sup_norm: self.sup_norm * self.sup_norm,
                }
            }
        }
    }

    fn clip(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        let lo = a.max(self.support.0);
        let hi = b.min(self.support.1);
        (hi > lo).then_some((lo, hi))
    }

    /// `int_a^b w`, exact for constant and cosine weights.
    pub fn integral(&self, a: f64, b: f64, tol: f64) -> f64 {
        let Some((lo, hi)) = self.clip(a, b) else {
            return 0.0;
        };
        match &self.shape {
            Shape::Constant(c) => c * (hi - lo),
            Shape::Cosine(k) => {
                let f = std::f64::consts::PI * f64::from(*k);
                std::f64::consts::SQRT_2 * ((f * hi).sin() - (f * lo).sin()) / f
            }
            Shape::Custom(f) => quad::integrate(|x| f(x), lo, hi, tol).value,
        }
    }

    /// `int_0^1 w^2`.
    pub fn l2_norm_sq(&self, tol: f64) -> f64 {
        match &self.shape {
            Shape::Constant(c) => c * c * (self.support.1 - self.support.0),
            _ => self.squared().integral(0.0, 1.0, tol),
        }
    }

    /// `int_a^b (height + r |x - apex|^beta) w(x) dx`.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate_cone(&self, a: f64, b: f64, apex: f64, height: f64, r: f64, beta: f64, tol: f64) -> Quadrature {
        let Some((lo, hi)) = self.clip(a, b) else {
            return Quadrature::ZERO;
        };
        match &self.shape {
            Shape::Constant(c) => {
                // F(x) = sign(x - apex) |x - apex|^(beta+1) / (beta+1)
                let anti = |x: f64| {
                    let d = x - apex;
                    d.signum() * d.abs().powf(beta + 1.0) / (beta + 1.0)
                };
                Quadrature {
                    value: c * (height * (hi - lo) + r * (anti(hi) - anti(lo))),
                    error: 0.0,
                }
            }
            _ => quad::integrate_with_breaks(
                |x| (height + r * (x - apex).abs().powf(beta)) * self.eval(x),
                lo,
                hi,
                &[apex],
                tol,
            ),
        }
    }
}

fn check_support(a: f64, b: f64) -> Result<()> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(Error::invalid("support", format!("[{a}, {b}] is not a subinterval of [0,1]")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_outside_support() {
        let w = WeightFunction::from_id("indicator:0:0.9").unwrap();
        assert_eq!(w.eval(0.95), 0.0);
        assert_eq!(w.eval(0.5), 1.0);
        assert_abs_diff_eq!(w.integral(0.0, 1.0, 1e-12), 0.9, epsilon = 1e-15);
    }

    #[test]
    fn cosine_basis_is_orthonormal() {
        for m in 1..6u32 {
            for k in 1..6u32 {
                let a = WeightFunction::cosine_basis(m).unwrap();
                let b = WeightFunction::cosine_basis(k).unwrap();
                let ip = quad::integrate(|x| a.eval(x) * b.eval(x), 0.0, 1.0, 1e-13).value;
                let want = if m == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(ip, want, epsilon = 1e-11);
            }
            assert!(WeightFunction::cosine_basis(m).unwrap().sup_norm() >= 1.0);
        }
        assert!(WeightFunction::cosine_basis(0).is_err());
    }

    #[test]
    fn exact_integrals_match_quadrature() {
        let w = WeightFunction::cosine_basis(4).unwrap();
        let q = quad::integrate(|x| w.eval(x), 0.1, 0.7, 1e-13).value;
        assert_abs_diff_eq!(w.integral(0.1, 0.7, 1e-12), q, epsilon = 1e-12);

        let c = WeightFunction::constant(2.0);
        let exact = c.integrate_cone(0.0, 1.0, 0.3, 1.0, 2.0, 0.5, 1e-12).value;
        let num = quad::integrate_with_breaks(|x| 2.0 * (1.0 + 2.0 * (x - 0.3f64).abs().sqrt()), 0.0, 1.0, &[0.3], 1e-13).value;
        assert_abs_diff_eq!(exact, num, epsilon = 1e-11);
        let viaq = w.integrate_cone(0.0, 1.0, 0.3, 1.0, 2.0, 0.5, 1e-12).value;
        let num = quad::integrate_with_breaks(|x| w.eval(x) * (1.0 + 2.0 * (x - 0.3f64).abs().sqrt()), 0.0, 1.0, &[0.3], 1e-13).value;
        assert_abs_diff_eq!(viaq, num, epsilon = 1e-10);
    }

    #[test]
    fn bad_support_rejected() {
        assert!(WeightFunction::constant_on(1.0, 0.5, 1.2).is_err());
        assert!(WeightFunction::from_id("box:1:0.6:0.2").is_err());
    }
}
