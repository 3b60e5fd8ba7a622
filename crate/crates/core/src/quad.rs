//! Adaptive Gauss-Kronrod (7/15) quadrature with global bisection.
//!
//! Integrands here have kinks (cone apexes, positive parts, weight support
//! edges) so callers pass known break points; the adaptive refinement takes
//! care of the rest.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

/// A quadrature value together with its estimated absolute error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Quadrature {
    type Output = Quadrature;
    fn add(self, rhs: Self) -> Self {
        Quadrature {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl Quadrature {
    pub const ZERO: Quadrature = Quadrature {
        value: 0.0,
        error: 0.0,
    };
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    integrate_with_breaks(f, a, b, &[], tol)
}

/// Integrates `f` over `[a, b]`, splitting first at every interior point of
/// `breaks`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> Quadrature {
    if a.is_nan() || b.is_nan() || b <= a {
        return Quadrature::ZERO;
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut lo = a;
    for &c in cuts.iter().chain(std::iter::once(&b)) {
        if c > lo {
            heap.push(kronrod(&f, lo, c));
        }
        lo = c;
    }

    let mut total_err: f64 = heap.iter().map(|s| s.error).sum();
    while total_err > tol && heap.len() < MAX_SEGMENTS {
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval no longer splittable in floating point
            heap.push(worst);
            break;
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Sum in interval order so the result does not depend on heap layout.
    let mut segs = heap.into_vec();
    segs.sort_by(|p, q| p.a.total_cmp(&q.a));
    segs.iter().fold(Quadrature::ZERO, |acc, s| {
        acc + Quadrature {
            value: s.value,
            error: s.error,
        }
    })
}

/// Integrates `f` over `[a, ∞)` via the substitution `x = a + t/(1-t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Quadrature {
    let g = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        let x = a + t / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}
