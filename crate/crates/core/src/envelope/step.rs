use crate::error::{Error, Result};
use crate::model::{Point, WeightFunction};

/// One constant piece `(lo, hi]` of a step envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

/// Suffix-minimum envelope `x -> min_{i: X_i >= x} Y_i`, infinite past the
/// largest abscissa.
#[derive(Clone, Debug)]
pub struct StepEnvelope {
    steps: Vec<Step>,
    domain_end: f64,
    on_graph: Vec<usize>,
    site_count: usize,
}

impl StepEnvelope {
    pub fn build(sites: &[Point]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EstimationFailure("step envelope of an empty site list".into()));
        }
        if sites.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::invalid("sites", "coordinates must be finite"));
        }
        let n = sites.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sites[a].x.total_cmp(&sites[b].x).then(a.cmp(&b)));

        let mut suffix = vec![f64::INFINITY; n + 1];
        for p in (0..n).rev() {
            suffix[p] = suffix[p + 1].min(sites[order[p]].y);
        }

        let mut steps: Vec<Step> = Vec::new();
        let mut on_graph = Vec::new();
        let mut prev_x = 0.0f64;
        let mut p = 0;
        while p < n {
            let x = sites[order[p]].x;
            let group_end = (p..n).find(|&q| sites[order[q]].x != x).unwrap_or(n);
            let value = suffix[p];
            for &i in &order[p..group_end] {
                if sites[i].y <= value {
                    on_graph.push(i);
                }
            }
            if x > prev_x || steps.is_empty() {
                match steps.last_mut() {
                    Some(last) if last.value == value => last.hi = x,
                    _ => steps.push(Step {
                        lo: prev_x.min(x),
                        hi: x,
                        value,
                    }),
                }
                prev_x = x;
            }
            p = group_end;
        }
        on_graph.sort_unstable();
        Ok(Self {
            steps,
            domain_end: prev_x,
            on_graph,
            site_count: n,
        })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x > self.domain_end {
            return f64::INFINITY;
        }
        let idx = self.steps.partition_point(|s| s.hi < x).min(self.steps.len() - 1);
        self.steps[idx].value
    }

    /// Original indices of sites with `Y_j <= Y_i` for every `X_i >= X_j`, ascending.
    pub fn on_graph_sites(&self) -> Vec<usize> {
        self.on_graph.clone()
    }

    pub fn on_graph_count(&self) -> usize {
        self.on_graph.len()
    }

    /// `int env w` over the support of `w`.
    pub fn integrate(&self, w: &WeightFunction, tol: f64) -> Result<f64> {
        if w.is_zero() {
            return Ok(0.0);
        }
        let (a, b) = w.support();
        if b > self.domain_end {
            return Err(Error::Domain(format!(
                "weight support ends at {b} but the last observation is at {}",
                self.domain_end
            )));
        }
        let per_step = tol / self.steps.len() as f64;
        Ok(self
            .steps
            .iter()
            .filter(|s| s.hi > a && s.lo < b)
            .map(|s| s.value * w.integral(s.lo.max(a), s.hi.min(b), per_step))
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn example() -> Vec<Point> {
        vec![Point::new(0.2, 1.0), Point::new(0.5, 0.4), Point::new(0.8, 0.7)]
    }

    #[test]
    fn three_site_example() {
        let env = StepEnvelope::build(&example()).unwrap();
        assert_eq!(env.on_graph_sites(), vec![1, 2]);
        assert_eq!(env.eval(0.1), 0.4);
        assert_eq!(env.eval(0.5), 0.4);
        assert_eq!(env.eval(0.6), 0.7);
        assert_eq!(env.eval(0.81), f64::INFINITY);
        let w = WeightFunction::constant_on(1.0, 0.0, 0.8).unwrap();
        assert_abs_diff_eq!(env.integrate(&w, 1e-9).unwrap(), 0.41, epsilon = 1e-15);
        assert_eq!(env.integrate(&WeightFunction::constant(0.0), 1e-9).unwrap(), 0.0);
        assert!(matches!(env.integrate(&WeightFunction::constant(1.0), 1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn ties_and_duplicates() {
        let sites = [Point::new(0.3, 0.5), Point::new(0.3, 0.5), Point::new(0.3, 0.6), Point::new(0.9, 0.5)];
        let env = StepEnvelope::build(&sites).unwrap();
        assert_eq!(env.on_graph_sites(), vec![0, 1, 3]);
        assert_eq!(env.eval(0.6), 0.5);
        let single = StepEnvelope::build(&[Point::new(0.7, 2.0)]).unwrap();
        assert_eq!(single.on_graph_sites(), vec![0]);
        assert!(StepEnvelope::build(&[]).is_err());
    }

    #[test]
    fn step_values_nondecreasing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let sites: Vec<Point> = (0..200).map(|_| Point::new(rng.random(), rng.random())).collect();
        let env = StepEnvelope::build(&sites).unwrap();
        for pair in env.steps().windows(2) {
            assert!(pair[0].value < pair[1].value);
            assert_eq!(pair[0].hi, pair[1].lo);
        }
        for (j, p) in sites.iter().enumerate() {
            let suffix = sites.iter().filter(|q| q.x >= p.x).map(|q| q.y).fold(f64::INFINITY, f64::min);
            assert_eq!(env.eval(p.x), suffix);
            assert_eq!(env.on_graph_sites().contains(&j), p.y <= suffix);
        }
    }
}
