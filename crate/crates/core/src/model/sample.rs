use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundaryFunction, NoiseModel};
use crate::rng::Provenance;

const MAX_EXTENSIONS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Which part of the point process a sample is known to contain.
#[derive(Clone, Debug)]
pub enum Coverage {
    /// Every observation is present (e.g. data read from disk).
    Complete,
    /// All points with `g(x) <= y <= g(x) + height` are present, nothing above.
    Band {
        boundary: BoundaryFunction,
        height: f64,
    },
}

/// Observations of the point process with intensity `n 1(y >= g(x))`.
#[derive(Clone, Debug)]
pub struct PointSample {
    points: Vec<Point>,
    intensity: f64,
    coverage: Coverage,
    provenance: Option<Provenance>,
}

impl PointSample {
    /// Wraps a fully observed point set.
    pub fn from_points(points: Vec<Point>, intensity: f64) -> Result<Self> {
        check_intensity(intensity)?;
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite()) || p.x < 0.0 || p.x > 1.0) {
            return Err(Error::invalid("points", "coordinates must be finite with x in [0,1]"));
        }
        Ok(Self {
            points,
            intensity,
            coverage: Coverage::Complete,
            provenance: None,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The intensity scale `n`.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn coverage(&self) -> &Coverage {
        &self.coverage
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn band_height(&self) -> Option<f64> {
        match &self.coverage {
            Coverage::Complete => None,
            Coverage::Band { height, .. } => Some(*height),
        }
    }

    /// Conservative global ceiling `g_max + T`.
    pub fn ceiling(&self) -> f64 {
        match &self.coverage {
            Coverage::Complete => f64::INFINITY,
            Coverage::Band { boundary, height } => boundary.g_max() + height,
        }
    }

    /// Checks that every point with `y <= level` and `x` in `[a, b]` is present.
    pub fn check_level(&self, a: f64, b: f64, level: f64) -> Result<()> {
        match &self.coverage {
            Coverage::Complete => Ok(()),
            Coverage::Band { boundary, height } => {
                let need = level - boundary.lower_bound_on(a, b);
                if need <= *height {
                    Ok(())
                } else {
                    Err(Error::BandExceeded {
                        required: need,
                        available: *height,
                    })
                }
            }
        }
    }

    /// For estimators whose output depends on points anywhere below `level`
    /// over the whole unit interval.
    pub fn check_global_level(&self, level: f64) -> Result<()> {
        match &self.coverage {
            Coverage::Complete => Ok(()),
            Coverage::Band { boundary, height } => {
                let need = level - boundary.g_min();
                if need <= *height {
                    Ok(())
                } else {
                    Err(Error::BandExceeded {
                        required: need,
                        available: *height,
                    })
                }
            }
        }
    }

    /// The boundary the band was drawn above, if this is a simulated band.
    pub fn band_boundary(&self) -> Option<&BoundaryFunction> {
        match &self.coverage {
            Coverage::Complete => None,
            Coverage::Band { boundary, .. } => Some(boundary),
        }
    }

    /// Same points with every ordinate shifted by `c` (and the band with them).
    pub fn shifted(&self, c: f64) -> PointSample {
        let points = self.points.iter().map(|p| Point::new(p.x, p.y + c)).collect();
        let coverage = match &self.coverage {
            Coverage::Complete => Coverage::Complete,
            Coverage::Band { boundary, height } => {
                let inner = boundary.clone();
                let shifted = BoundaryFunction::custom(
                    format!("{}+{c}", boundary.id()),
                    move |x| inner.eval(x) + c,
                    boundary.class(),
                    boundary.g_min() + c,
                    boundary.g_max() + c,
                )
                .expect("shifted bounds stay ordered");
                Coverage::Band {
                    boundary: shifted,
                    height: *height,
                }
            }
        };
        PointSample {
            points,
            intensity: self.intensity,
            coverage,
            provenance: self.provenance,
        }
    }

    /// Same sample with the points reordered by `perm`.
    pub fn permuted(&self, perm: &[usize]) -> PointSample {
        let mut out = self.clone();
        out.points = perm.iter().map(|&i| self.points[i]).collect();
        out
    }
}

/// Fixed-design observations `y_i = g(i/n) + eps_i`, `i = 1..n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegressionSample {
    ys: Vec<f64>,
    provenance: Option<Provenance>,
}

impl RegressionSample {
    pub fn from_values(ys: Vec<f64>) -> Result<Self> {
        if ys.is_empty() {
            return Err(Error::invalid("n", "regression sample must be nonempty"));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::invalid("y", "values must be finite"));
        }
        Ok(Self { ys, provenance: None })
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn n(&self) -> usize {
        self.ys.len()
    }

    /// Design point of the 1-based index `i`.
    #[inline]
    pub fn design(&self, i: usize) -> f64 {
        i as f64 / self.ys.len() as f64
    }

    pub fn provenance(&self) -> Option<Provenance> {
        self.provenance
    }

    pub fn shifted(&self, c: f64) -> RegressionSample {
        RegressionSample {
            ys: self.ys.iter().map(|y| y + c).collect(),
            provenance: self.provenance,
        }
    }
}

fn check_intensity(n: f64) -> Result<()> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid("n", format!("intensity must be positive, got {n}")));
    }
    Ok(())
}

/// Default band height `R + 20/(n h_min) + 1`.
pub fn default_band_height(r: f64, n: f64, h_min: f64) -> f64 {
    r + 20.0 / (n * h_min) + 1.0
}

fn draw_band<R: Rng + ?Sized>(g: &BoundaryFunction, n: f64, base: f64, height: f64, rng: &mut R) -> Vec<Point> {
    let mean = n * height;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    } else {
        0
    };
    (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            Point::new(u, g.eval(u) + base + v * height)
        })
        .collect()
}

/// Draws the point process restricted to the band `g(x) <= y <= g(x) + band_height`.
pub fn sample_ppp<R: Rng + ?Sized>(g: &BoundaryFunction, n: f64, band_height: f64, rng: &mut R) -> Result<PointSample> {
    check_intensity(n)?;
    if !(band_height > 0.0 && band_height.is_finite()) {
        return Err(Error::invalid("band_height", format!("must be positive, got {band_height}")));
    }
    Ok(PointSample {
        points: draw_band(g, n, 0.0, band_height, rng),
        intensity: n,
        coverage: Coverage::Band {
            boundary: g.clone(),
            height: band_height,
        },
        provenance: None,
    })
}

/// Like [`sample_ppp`] but records the stream the sample was drawn from.
pub fn sample_ppp_from(g: &BoundaryFunction, n: f64, band_height: f64, provenance: Provenance) -> Result<(PointSample, crate::rng::SimRng)> {
    let mut rng = provenance.rng();
    let mut s = sample_ppp(g, n, band_height, &mut rng)?;
    s.provenance = Some(provenance);
    Ok((s, rng))
}

/// Adds an independent realization on `[g + T, g + T + extra]`. By superposition
/// the result is the process on the taller band.
pub fn extend_ppp<R: Rng + ?Sized>(sample: &mut PointSample, g: &BoundaryFunction, extra: f64, rng: &mut R) -> Result<()> {
    if !(extra > 0.0 && extra.is_finite()) {
        return Err(Error::invalid("extra_height", format!("must be positive, got {extra}")));
    }
    let Coverage::Band { height, .. } = &mut sample.coverage else {
        return Err(Error::invalid("sample", "only simulated band samples can be extended"));
    };
    let base = *height;
    sample.points.extend(draw_band(g, sample.intensity, base, extra, rng));
    *height = base + extra;
    Ok(())
}

/// Runs `estimate`, extending the band whenever it reports
/// [`Error::BandExceeded`], until it succeeds or fails for another reason.
pub fn with_band_extension<T, R, F>(sample: &mut PointSample, g: &BoundaryFunction, rng: &mut R, mut estimate: F) -> Result<T>
where
    R: Rng + ?Sized,
    F: FnMut(&PointSample) -> Result<T>,
{
    for _ in 0..MAX_EXTENSIONS {
        match estimate(sample) {
            Err(Error::BandExceeded { required, available }) => {
                let extra = (1.25 * required - available).max(0.5 * available).max(1e-3);
                extend_ppp(sample, g, extra, rng)?;
            }
            other => return other,
        }
    }
    Err(Error::EstimationFailure("band extension did not converge".into()))
}

/// `y_i = g(i/n) + eps_i` for `i = 1..n`.
pub fn sample_regression<R: Rng + ?Sized>(g: &BoundaryFunction, n: usize, noise: &NoiseModel, rng: &mut R) -> Result<RegressionSample> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let nf = n as f64;
    let ys = (1..=n).map(|i| g.eval(i as f64 / nf) + noise.sample(rng)).collect();
    Ok(RegressionSample { ys, provenance: None })
}

pub fn sample_regression_from(g: &BoundaryFunction, n: usize, noise: &NoiseModel, provenance: Provenance) -> Result<RegressionSample> {
    let mut rng = provenance.rng();
    let mut s = sample_regression(g, n, noise, &mut rng)?;
    s.provenance = Some(provenance);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn zero_band_rejected() {
        let mut rng = stream_rng(1, 0);
        let g = BoundaryFunction::constant(0.0);
        assert!(matches!(sample_ppp(&g, 10.0, 0.0, &mut rng), Err(Error::InvalidParameter { .. })));
        assert!(matches!(sample_ppp(&g, 0.0, 1.0, &mut rng), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn points_stay_inside_the_band() {
        let mut rng = stream_rng(2, 0);
        let g = BoundaryFunction::linear(0.0, 1.0);
        let s = sample_ppp(&g, 500.0, 0.5, &mut rng).unwrap();
        assert!(!s.is_empty());
        for p in s.points() {
            let d = p.y - p.x;
            assert!((0.0..=0.5 + 1e-15).contains(&d), "{d}");
            assert!(p.y <= s.ceiling());
        }
    }

    #[test]
    fn extension_raises_the_band() {
        let mut rng = stream_rng(3, 0);
        let g = BoundaryFunction::sqrt();
        let mut s = sample_ppp(&g, 200.0, 0.5, &mut rng).unwrap();
        let before = s.len();
        extend_ppp(&mut s, &g, 0.5, &mut rng).unwrap();
        assert_eq!(s.band_height(), Some(1.0));
        assert!(s.len() >= before);
        for p in &s.points()[before..] {
            let d = p.y - g.eval(p.x);
            assert!((0.5 - 1e-12..=1.0 + 1e-12).contains(&d));
        }
        assert!(extend_ppp(&mut s, &g, 0.0, &mut rng).is_err());
    }

    #[test]
    fn level_checks() {
        let mut rng = stream_rng(4, 0);
        let g = BoundaryFunction::constant(1.0);
        let s = sample_ppp(&g, 10.0, 2.0, &mut rng).unwrap();
        assert!(s.check_level(0.0, 0.1, 2.9).is_ok());
        match s.check_level(0.0, 0.1, 3.5) {
            Err(Error::BandExceeded { required, available }) => {
                assert!((required - 2.5).abs() < 1e-12);
                assert_eq!(available, 2.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn regression_is_one_sided() {
        let mut rng = stream_rng(5, 0);
        let g = BoundaryFunction::sqrt();
        let noise = NoiseModel::exponential(1.0).unwrap();
        let s = sample_regression(&g, 100, &noise, &mut rng).unwrap();
        for i in 1..=100 {
            assert!(s.values()[i - 1] >= g.eval(s.design(i)));
        }
        let s = sample_regression(&g, 5, &NoiseModel::Zero, &mut rng).unwrap();
        for i in 1..=5 {
            assert_eq!(s.values()[i - 1], g.eval(i as f64 / 5.0));
        }
    }

    #[test]
    fn determinism() {
        let g = BoundaryFunction::sine_ramp();
        let p = Provenance::new(11, 42);
        let (a, _) = sample_ppp_from(&g, 300.0, 1.0, p).unwrap();
        let (b, _) = sample_ppp_from(&g, 300.0, 1.0, p).unwrap();
        assert_eq!(a.points(), b.points());
        let noise = NoiseModel::exponential(1.0).unwrap();
        let r1 = sample_regression_from(&g, 50, &noise, p).unwrap();
        let r2 = sample_regression_from(&g, 50, &noise, p).unwrap();
        assert_eq!(r1.values(), r2.values());
    }
}
