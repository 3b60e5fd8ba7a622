use crate::error::{Error, Result};
use crate::model::{Point, WeightFunction};
use crate::quad::Quadrature;

/// Maximum recursion depth when a third cone undercuts a crossing.
const MAX_SPLIT_DEPTH: usize = 64;
/// Bisection tolerance for crossings of non-Lipschitz cones.
const CROSSING_TOL: f64 = 1e-13;

/// A maximal interval on which one site attains the envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    /// Index into the original site list.
    pub owner: usize,
}

/// Lower envelope `x -> min_j (Y_j + R |x - X_j|^beta)` on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct ConeEnvelope {
    beta: f64,
    r: f64,
    /// Undominated sites sorted by abscissa.
    active: Vec<Point>,
    /// Original index of each entry of `active`.
    active_index: Vec<usize>,
    /// Pieces with `owner` referring to positions in `active`.
    pieces: Vec<(f64, f64, usize)>,
    site_count: usize,
}

impl ConeEnvelope {
    /// Builds the envelope of `sites`. Dominated sites are pruned; for
    /// `beta = 1` crossings are solved in closed form, otherwise by bisection.
    pub fn build(sites: &[Point], beta: f64, r: f64) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EstimationFailure("cone envelope of an empty site list".into()));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta", format!("must lie in (0, 1], got {beta}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("R", format!("must be positive, got {r}")));
        }
        if sites.iter().any(|p| !(p.x >= 0.0 && p.x <= 1.0 && p.y.is_finite())) {
            return Err(Error::invalid("sites", "abscissae must lie in [0,1] and ordinates be finite"));
        }

        let flags = cone_on_graph_flags(sites, beta, r);
        let mut active_index: Vec<usize> = (0..sites.len()).filter(|&i| flags[i]).collect();
        active_index.sort_by(|&a, &b| sites[a].x.total_cmp(&sites[b].x).then(a.cmp(&b)));
        let active: Vec<Point> = active_index.iter().map(|&i| sites[i]).collect();

        let mut env = ConeEnvelope {
            beta,
            r,
            active,
            active_index,
            pieces: Vec::new(),
            site_count: sites.len(),
        };
        env.build_pieces();
        Ok(env)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    #[inline]
    fn cone(&self, a: usize, x: f64) -> f64 {
        let p = self.active[a];
        let d = (x - p.x).abs();
        if self.beta == 1.0 {
            p.y + self.r * d
        } else {
            p.y + self.r * d.powf(self.beta)
        }
    }

    fn argmin_at(&self, x: f64) -> usize {
        let mut best = 0;
        let mut best_v = f64::INFINITY;
        for a in 0..self.active.len() {
            let v = self.cone(a, x);
            if v < best_v {
                best_v = v;
                best = a;
            }
        }
        best
    }

    fn build_pieces(&mut self) {
        let mut nodes: Vec<(f64, usize)> = Vec::with_capacity(self.active.len() + 2);
        nodes.push((0.0, self.argmin_at(0.0)));
        for (a, p) in self.active.iter().enumerate() {
            nodes.push((p.x, a));
        }
        nodes.push((1.0, self.argmin_at(1.0)));

        let mut raw = Vec::with_capacity(2 * nodes.len());
        for w in nodes.windows(2) {
            let (l, a) = w[0];
            let (r, b) = w[1];
            if r > l {
                self.resolve(l, a, r, b, 0, &mut raw);
            }
        }

        let mut merged: Vec<(f64, f64, usize)> = Vec::with_capacity(raw.len());
        for (lo, hi, o) in raw {
            if hi <= lo {
                continue;
            }
            match merged.last_mut() {
                Some(last) if last.2 == o => last.1 = hi,
                _ => merged.push((lo, hi, o)),
            }
        }
        if merged.is_empty() {
            // all sites share one abscissa at an endpoint
            merged.push((0.0, 1.0, self.argmin_at(0.5)));
        }
        self.pieces = merged;
    }

    /// Fills `[l, r]`, where `a` owns `l` and `b` owns `r`, and no apex lies
    /// strictly inside. Every pairwise cone difference is strictly monotone
    /// there, so two distinct owners cross exactly once.
    fn resolve(&self, l: f64, a: usize, r: f64, b: usize, depth: usize, out: &mut Vec<(f64, f64, usize)>) {
        if a == b {
            out.push((l, r, a));
            return;
        }
        let x = self.crossing(a, b, l, r);
        if self.beta < 1.0 && depth < MAX_SPLIT_DEPTH {
            let c = self.argmin_at(x);
            let va = self.cone(a, x).min(self.cone(b, x));
            let vc = self.cone(c, x);
            if c != a && c != b && vc < va - 1e-13 * (1.0 + va.abs()) {
                self.resolve(l, a, x, c, depth + 1, out);
                self.resolve(x, c, r, b, depth + 1, out);
                return;
            }
        }
        out.push((l, x, a));
        out.push((x, r, b));
    }

    fn crossing(&self, a: usize, b: usize, l: f64, r: f64) -> f64 {
        let d = |x: f64| self.cone(a, x) - self.cone(b, x);
        if d(l) >= 0.0 {
            return l;
        }
        if d(r) <= 0.0 {
            return r;
        }
        if self.beta == 1.0 {
            // Y_a + R s_a (x - X_a) = Y_b + R s_b (x - X_b), signs fixed on (l, r)
            let mid = 0.5 * (l + r);
            let (pa, pb) = (self.active[a], self.active[b]);
            let sa = if mid >= pa.x { 1.0 } else { -1.0 };
            let sb = if mid >= pb.x { 1.0 } else { -1.0 };
            if sa != sb {
                let x = (pb.y - pa.y + self.r * (sa * pa.x - sb * pb.x)) / (self.r * (sa - sb));
                return x.clamp(l, r);
            }
        }
        let (mut lo, mut hi) = (l, r);
        while hi - lo > CROSSING_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if d(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        self.pieces.iter().map(|&(lo, hi, o)| Piece {
            lo,
            hi,
            owner: self.active_index[o],
        })
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Largest envelope value on each piece, paired with the piece interval.
    pub fn piece_maxima(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.pieces.iter().map(move |&(lo, hi, o)| {
            let v = self.cone(o, lo).max(self.cone(o, hi));
            (lo, hi, v)
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.pieces.partition_point(|&(_, hi, _)| hi < x).min(self.pieces.len() - 1);
        self.cone(self.pieces[idx].2, x)
    }

    /// Envelope values at sorted abscissae in one pass over the pieces.
    pub fn eval_sorted(&self, xs: impl IntoIterator<Item = f64>) -> Vec<f64> {
        let mut idx = 0;
        xs.into_iter()
            .map(|x| {
                while idx + 1 < self.pieces.len() && self.pieces[idx].1 < x {
                    idx += 1;
                }
                self.cone(self.pieces[idx].2, x)
            })
            .collect()
    }

    /// Original indices of sites lying on the envelope, ascending.
    pub fn on_graph_sites(&self) -> Vec<usize> {
        let mut v = self.active_index.clone();
        v.sort_unstable();
        v
    }

    pub fn on_graph_count(&self) -> usize {
        self.active_index.len()
    }

    /// `int_0^1 env(x) w(x) dx`.
    pub fn integrate(&self, w: &WeightFunction, tol: f64) -> Quadrature {
        if w.is_zero() {
            return Quadrature::ZERO;
        }
        let per_piece = tol / self.pieces.len() as f64;
        self.pieces.iter().fold(Quadrature::ZERO, |acc, &(lo, hi, o)| {
            let p = self.active[o];
            acc + w.integrate_cone(lo, hi, p.x, p.y, self.r, self.beta, per_piece)
        })
    }
}

/// Site `j` is on the graph iff `Y_j <= min_{i != j} (Y_i + R |X_j - X_i|^beta)`.
/// Ties count as on-graph.
pub fn cone_on_graph_flags(sites: &[Point], beta: f64, r: f64) -> Vec<bool> {
    let n = sites.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sites[a].x.total_cmp(&sites[b].x).then(a.cmp(&b)));
    let xs: Vec<f64> = order.iter().map(|&i| sites[i].x).collect();
    let ys: Vec<f64> = order.iter().map(|&i| sites[i].y).collect();

    let sorted_flags = if beta == 1.0 {
        lipschitz_flags(&xs, &ys, r)
    } else {
        hoelder_flags(&xs, &ys, beta, r)
    };
    let mut flags = vec![false; n];
    for (p, &i) in order.iter().enumerate() {
        flags[i] = sorted_flags[p];
    }
    flags
}

fn lipschitz_flags(xs: &[f64], ys: &[f64], r: f64) -> Vec<bool> {
    let n = xs.len();
    // argmin of Y_i - R X_i over positions < p, and of Y_i + R X_i over > p
    let mut left = vec![usize::MAX; n];
    let mut best = usize::MAX;
    for p in 0..n {
        left[p] = best;
        if best == usize::MAX || ys[p] - r * xs[p] < ys[best] - r * xs[best] {
            best = p;
        }
    }
    let mut right = vec![usize::MAX; n];
    best = usize::MAX;
    for p in (0..n).rev() {
        right[p] = best;
        if best == usize::MAX || ys[p] + r * xs[p] < ys[best] + r * xs[best] {
            best = p;
        }
    }
    (0..n)
        .map(|p| {
            let beats = |i: usize| i == usize::MAX || ys[p] <= ys[i] + r * (xs[p] - xs[i]).abs();
            beats(left[p]) && beats(right[p])
        })
        .collect()
}

fn hoelder_flags(xs: &[f64], ys: &[f64], beta: f64, r: f64) -> Vec<bool> {
    let n = xs.len();
    let cone = |i: usize, x: f64| ys[i] + r * (x - xs[i]).abs().powf(beta);
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);

    // Cheap prefilter: the lowest site of each cell dominates most others.
    let cells = ((n as f64).sqrt().ceil() as usize).max(1);
    let (x0, x1) = (xs[0], xs[n - 1]);
    let width = ((x1 - x0) / cells as f64).max(f64::MIN_POSITIVE);
    let mut cell_min = vec![usize::MAX; cells];
    for p in 0..n {
        let c = (((xs[p] - x0) / width) as usize).min(cells - 1);
        if cell_min[c] == usize::MAX || ys[p] < ys[cell_min[c]] {
            cell_min[c] = p;
        }
    }
    let reps: Vec<usize> = cell_min.into_iter().filter(|&p| p != usize::MAX).collect();

    (0..n)
        .map(|p| {
            if reps.iter().any(|&i| i != p && cone(i, xs[p]) < ys[p]) {
                return false;
            }
            // Exact scan outward; sites further than the reach cannot dominate.
            let slack = ys[p] - y_min;
            for i in (0..p).rev() {
                let d = xs[p] - xs[i];
                if r * d.powf(beta) > slack {
                    break;
                }
                if cone(i, xs[p]) < ys[p] {
                    return false;
                }
            }
            for i in p + 1..n {
                let d = xs[i] - xs[p];
                if r * d.powf(beta) > slack {
                    break;
                }
                if cone(i, xs[p]) < ys[p] {
                    return false;
                }
            }
            true
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn brute_min(sites: &[Point], x: f64, beta: f64, r: f64) -> f64 {
        sites
            .iter()
            .map(|p| p.y + r * (x - p.x).abs().powf(beta))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn two_symmetric_cones() {
        let sites = [Point::new(0.25, 0.5), Point::new(0.75, 0.5)];
        let env = ConeEnvelope::build(&sites, 1.0, 2.0).unwrap();
        assert_eq!(env.piece_count(), 2);
        let pieces: Vec<Piece> = env.pieces().collect();
        assert_abs_diff_eq!(pieces[0].hi, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(env.eval(0.5), 1.0, epsilon = 1e-15);
        assert_eq!(env.on_graph_sites(), vec![0, 1]);
        let q = env.integrate(&WeightFunction::constant(1.0), 1e-9);
        assert_abs_diff_eq!(q.value, 0.75, epsilon = 1e-14);
        assert_eq!(env.integrate(&WeightFunction::constant(0.0), 1e-9).value, 0.0);
    }

    #[test]
    fn single_cone() {
        for beta in [0.3, 0.5, 1.0] {
            let env = ConeEnvelope::build(&[Point::new(0.4, 1.0)], beta, 1.5).unwrap();
            for k in 0..=20 {
                let x = k as f64 / 20.0;
                assert_abs_diff_eq!(env.eval(x), 1.0 + 1.5 * (x - 0.4f64).abs().powf(beta), epsilon = 1e-14);
            }
            assert_eq!(env.on_graph_sites(), vec![0]);
        }
    }

    #[test]
    fn empty_and_invalid() {
        assert!(ConeEnvelope::build(&[], 1.0, 1.0).is_err());
        assert!(ConeEnvelope::build(&[Point::new(0.5, 0.0)], 1.5, 1.0).is_err());
        assert!(ConeEnvelope::build(&[Point::new(0.5, 0.0)], 1.0, 0.0).is_err());
    }

    #[test]
    fn matches_brute_force_on_grid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for beta in [0.5, 1.0] {
            let sites: Vec<Point> = (0..50).map(|_| Point::new(rng.random(), rng.random())).collect();
            let env = ConeEnvelope::build(&sites, beta, 1.0).unwrap();
            for k in 0..=10_000 {
                let x = k as f64 / 10_000.0;
                assert_abs_diff_eq!(env.eval(x), brute_min(&sites, x, beta, 1.0), epsilon = 1e-9);
            }
            let xs: Vec<f64> = (0..=100).map(|k| k as f64 / 100.0).collect();
            for (x, v) in xs.iter().zip(env.eval_sorted(xs.iter().copied())) {
                assert_abs_diff_eq!(v, brute_min(&sites, *x, beta, 1.0), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn owner_is_minimal_on_each_piece() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let sites: Vec<Point> = (0..80).map(|_| Point::new(rng.random(), 0.3 * rng.random::<f64>())).collect();
        let env = ConeEnvelope::build(&sites, 0.5, 2.0).unwrap();
        let mut prev_hi = 0.0;
        for piece in env.pieces() {
            assert_abs_diff_eq!(piece.lo, prev_hi, epsilon = 0.0);
            prev_hi = piece.hi;
            for x in [piece.lo, 0.5 * (piece.lo + piece.hi), piece.hi] {
                let own = sites[piece.owner].y + 2.0 * (x - sites[piece.owner].x).abs().sqrt();
                assert!(own <= brute_min(&sites, x, 0.5, 2.0) + 1e-9);
            }
        }
        assert_eq!(prev_hi, 1.0);
    }

    #[test]
    fn far_low_site_can_own_a_remote_piece() {
        // With beta < 1 cones flatten, so a low site far to the right can
        // undercut a closer one near x = 0.
        let sites = [Point::new(0.3, 0.55), Point::new(1.0, 0.0)];
        let env = ConeEnvelope::build(&sites, 0.25, 1.0).unwrap();
        for k in 0..=1000 {
            let x = k as f64 / 1000.0;
            assert_abs_diff_eq!(env.eval(x), brute_min(&sites, x, 0.25, 1.0), epsilon = 1e-12);
        }
        let owners: Vec<usize> = env.pieces().map(|p| p.owner).collect();
        assert_eq!(owners, vec![1, 0, 1]);
    }
}
