use crate::model::BoundaryFunction;
use crate::quad;

const TOL: f64 = 1e-10;

/// `int_0^1 (s - R|xi - x|^beta + g(x) - g(xi))_+ dxi`.
pub fn deviation_exponent(g: &BoundaryFunction, x: f64, s: f64, beta: f64, r: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if g.constant_value().is_some() {
        return constant_exponent(x, s, beta, r);
    }
    let reach = (s / r).powf(1.0 / beta);
    let gx = g.eval(x);
    let breaks = [x - reach, x, x + reach];
    quad::integrate_with_breaks(
        |xi| (s - r * (xi - x).abs().powf(beta) + gx - g.eval(xi)).max(0.0),
        0.0,
        1.0,
        &breaks,
        TOL,
    )
    .value
}

/// Closed form of [`deviation_exponent`] for constant `g`:
/// `s(a + b) - R(a^(beta+1) + b^(beta+1))/(beta+1)` with `a, b` the reach
/// clipped to `[0, 1]`.
pub fn constant_exponent(x: f64, s: f64, beta: f64, r: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let reach = (s / r).powf(1.0 / beta);
    let a = x.min(reach);
    let b = (1.0 - x).min(reach);
    s * (a + b) - r * (a.powf(beta + 1.0) + b.powf(beta + 1.0)) / (beta + 1.0)
}

/// `P(g_hat(x) - g(x) >= s)` for the Hölder envelope of a point process with
/// intensity `n` above `g`.
pub fn envelope_deviation_survival(g: &BoundaryFunction, x: f64, s: f64, n: f64, beta: f64, r: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    (-n * deviation_exponent(g, x, s, beta, r)).exp()
}

/// First and second moments of `g_hat(x) - g(x)` from its survival function.
pub fn deviation_moments(g: &BoundaryFunction, x: f64, n: f64, beta: f64, r: f64) -> (f64, f64) {
    let surv = |s: f64| envelope_deviation_survival(g, x, s, n, beta, r);
    let first = quad::integrate_to_infinity(surv, 0.0, 1e-12).value;
    let second = quad::integrate_to_infinity(|s| 2.0 * s * surv(s), 0.0, 1e-12).value;
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interior_lipschitz_example() {
        let g = BoundaryFunction::constant(0.0);
        assert_eq!(envelope_deviation_survival(&g, 0.5, 0.0, 100.0, 1.0, 1.0), 1.0);
        let p = envelope_deviation_survival(&g, 0.5, 0.1, 100.0, 1.0, 1.0);
        assert_abs_diff_eq!(p, (-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let g = BoundaryFunction::constant(0.3);
        for &(x, s, beta, r) in &[(0.5f64, 0.1f64, 1.0f64, 1.0f64), (0.1, 0.7, 0.5, 2.0), (0.9, 3.0, 0.3, 1.0), (0.0, 0.2, 1.0, 4.0)] {
            let reach = (s / r).powf(1.0 / beta);
            let q = quad::integrate_with_breaks(
                |xi: f64| (s - r * (xi - x).abs().powf(beta)).max(0.0),
                0.0,
                1.0,
                &[x - reach, x, x + reach],
                1e-12,
            )
            .value;
            assert_abs_diff_eq!(deviation_exponent(&g, x, s, beta, r), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn far_tail_bound() {
        let g = BoundaryFunction::sqrt();
        let (n, beta, r) = (50.0, 0.5, 1.0);
        let s = 2.0 * r + 1.0 + 0.3;
        let p = envelope_deviation_survival(&g, 0.4, s, n, beta, r);
        assert!(p <= (-n * (s - 2.0 * r / (beta + 1.0))).exp() * (1.0 + 1e-9));
    }

    #[test]
    fn moments_positive() {
        let (m1, m2) = deviation_moments(&BoundaryFunction::constant(0.0), 0.5, 200.0, 1.0, 1.0);
        assert!(m1 > 0.0 && m2 > m1 * m1);
        // interior: P(X >= s) = exp(-n s^2 / R) so E X = sqrt(pi R / n) / 2
        assert_abs_diff_eq!(m1, 0.5 * (std::f64::consts::PI / 200.0).sqrt(), epsilon = 1e-6);
    }
}
