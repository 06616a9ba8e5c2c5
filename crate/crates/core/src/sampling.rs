//! Deterministic point sets and parameter schedules.
//!
//! The low-discrepancy generator is the additive recurrence `R_d`
//! (`x_n = frac(s + n * alpha)` with `alpha_i = phi_d^-(i+1)`, `phi_d` the
//! positive root of `x^(d+1) = x + 1`), with a Cranley-Patterson shift `s`
//! drawn from `ChaCha8Rng::seed_from_u64(seed)`. The same `(box, count, seed)`
//! always yields the same point list on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vec<f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    UniformGrid {
        lower: Vec<f64>,
        upper: Vec<f64>,
        resolution: usize,
    },
    LowDiscrepancy {
        lower: Vec<f64>,
        upper: Vec<f64>,
        count: usize,
        seed: u64,
    },
    UserSupplied,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    points: Vec<Point>,
    dim: usize,
    provenance: Provenance,
}

impl SampleSet {
    pub fn user(points: Vec<Point>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::EmptySamples("user-supplied sample set".into()))?;
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        Ok(SampleSet { points, dim, provenance: Provenance::UserSupplied })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn seed(&self) -> Option<u64> {
        match self.provenance {
            Provenance::LowDiscrepancy { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Concatenation; the result is user-supplied.
    pub fn merged(&self, other: &SampleSet) -> Result<SampleSet> {
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        SampleSet::user(points)
    }

    /// A denser set of the same kind: a grid with every cell halved, or a
    /// low-discrepancy set with twice the count and a derived seed.
    /// User-supplied sets cannot be refined.
    pub fn refined(&self) -> Option<Result<SampleSet>> {
        match &self.provenance {
            Provenance::UniformGrid { lower, upper, resolution } => Some(make_samples(&Provenance::UniformGrid {
                lower: lower.clone(),
                upper: upper.clone(),
                resolution: 2 * resolution - 1,
            })),
            Provenance::LowDiscrepancy { lower, upper, count, seed } => {
                Some(make_samples(&Provenance::LowDiscrepancy {
                    lower: lower.clone(),
                    upper: upper.clone(),
                    count: 2 * count,
                    seed: seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
                }))
            }
            Provenance::UserSupplied => None,
        }
    }

    /// Mean spacing estimate `extent / count^(1/n)`, used as the initial
    /// step of local refinement searches.
    pub fn spacing(&self) -> f64 {
        let n = self.dim;
        let mut extent = 0.0;
        for i in 0..n {
            let lo = self.points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min);
            let hi = self.points.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max);
            extent += hi - lo;
        }
        let extent = extent / n as f64;
        if extent <= 0.0 {
            return 1e-3;
        }
        extent / (self.points.len() as f64).powf(1.0 / n as f64)
    }
}

fn check_box(lower: &[f64], upper: &[f64]) -> Result<()> {
    if lower.is_empty() || lower.len() != upper.len() {
        return Err(Error::invalid(format!(
            "box bounds must be nonempty and equal length ({} vs {})",
            lower.len(),
            upper.len()
        )));
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite()) {
        return Err(Error::invalid(format!("empty or non-finite box {lower:?} x {upper:?}")));
    }
    Ok(())
}

pub fn make_samples(spec: &Provenance) -> Result<SampleSet> {
    let points = match spec {
        Provenance::UniformGrid { lower, upper, resolution } => {
            check_box(lower, upper)?;
            if *resolution < 2 {
                return Err(Error::invalid(format!("grid resolution {resolution} < 2")));
            }
            let axes: Vec<Vec<f64>> = lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| linspace(l, u, *resolution))
                .collect();
            cartesian(&axes)
        }
        Provenance::LowDiscrepancy { lower, upper, count, seed } => {
            check_box(lower, upper)?;
            if *count == 0 {
                return Err(Error::invalid("low-discrepancy count must be >= 1"));
            }
            let mut seq = Rd::new(lower.len(), *seed);
            (0..*count)
                .map(|_| {
                    seq.next_unit()
                        .iter()
                        .zip(lower.iter().zip(upper))
                        .map(|(x, (l, u))| l + x * (u - l))
                        .collect()
                })
                .collect()
        }
        Provenance::UserSupplied => {
            return Err(Error::invalid("user-supplied sample sets are built with SampleSet::user"))
        }
    };
    Ok(SampleSet { dim: points.first().map_or(0, Vec::len), points, provenance: spec.clone() })
}

/// `n` evenly spaced values from `lo` to `hi` inclusive. Endpoints are exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / last)
            }
        })
        .collect()
}

/// Cartesian product, last axis varying fastest.
pub fn cartesian(axes: &[Vec<f64>]) -> Vec<Point> {
    let mut out: Vec<Point> = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// The shifted `R_d` sequence on `[0,1)^d`.
#[derive(Clone, Debug)]
pub struct Rd {
    alpha: Vec<f64>,
    shift: Vec<f64>,
    index: u64,
}

impl Rd {
    pub fn new(dim: usize, seed: u64) -> Self {
        let phi = rd_root(dim);
        let alpha = (1..=dim).map(|i| phi.powi(-(i as i32)).fract()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        Rd { alpha, shift, index: 0 }
    }

    pub fn skip(&mut self, n: u64) {
        self.index += n;
    }

    pub fn next_unit(&mut self) -> Vec<f64> {
        self.index += 1;
        let n = self.index as f64;
        self.alpha
            .iter()
            .zip(&self.shift)
            .map(|(a, s)| (s + n * a).fract())
            .collect()
    }
}

fn rd_root(dim: usize) -> f64 {
    // Newton on x^(d+1) - x - 1, starting right of the root.
    let p = (dim + 1) as i32;
    let mut x: f64 = 2.0;
    for _ in 0..64 {
        let fx = x.powi(p) - x - 1.0;
        let dfx = p as f64 * x.powi(p - 1) - 1.0;
        let next = x - fx / dfx;
        if (next - x).abs() < 1e-16 {
            break;
        }
        x = next;
    }
    x
}

/// `count` low-discrepancy points in the closed unit ball of `R^dim`, by
/// rejection from `[-1,1]^dim`. `stream` selects a disjoint segment of the
/// sequence so different callers get different points from the same seed.
pub fn unit_ball_points(dim: usize, count: usize, seed: u64, stream: u64) -> Vec<Point> {
    let mut seq = Rd::new(dim, seed);
    seq.skip(stream.wrapping_mul(1 << 20));
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: Point = seq.next_unit().iter().map(|x| 2.0 * x - 1.0).collect();
        if norm(&p) <= 1.0 {
            out.push(p);
        }
    }
    out
}

/// Pseudo-random unit vectors (normalised Gaussians).
pub fn unit_sphere_points(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    use rand_distr::{Distribution, StandardNormal};
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Point = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Parameter values `t` in `[0, 1[`, ordered increasing toward 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TSchedule(Vec<f64>);

impl TSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empty t-schedule"));
        }
        if values.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::invalid("t-schedule values must lie in [0, 1]"));
        }
        Ok(TSchedule(values))
    }

    /// `t_k = 1 - 2^-k` for `k = 1..=k_max`.
    pub fn geometric(k_max: u32) -> Self {
        TSchedule((1..=k_max as i32).map(|k| 1.0 - 2f64.powi(-k)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices of the last `n` entries (fewer if the schedule is short).
    pub fn tail_start(&self, n: usize) -> usize {
        self.0.len().saturating_sub(n)
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `t * u + (1 - t) * center`.
pub fn segment_point(t: f64, u: &[f64], center: &[f64]) -> Point {
    u.iter().zip(center).map(|(x, c)| t * x + (1.0 - t) * c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_1d_has_endpoints_and_midpoint() {
        let s = make_samples(&Provenance::UniformGrid { lower: vec![0.0], upper: vec![1.0], resolution: 3 })
            .unwrap();
        assert_eq!(s.points(), &[vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn uniform_grid_2d_corners() {
        let s = make_samples(&Provenance::UniformGrid {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 1.0],
            resolution: 2,
        })
        .unwrap();
        assert_eq!(s.points(), &[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn low_discrepancy_is_deterministic() {
        let spec = Provenance::LowDiscrepancy { lower: vec![-1.0, 0.0], upper: vec![1.0, 2.0], count: 100, seed: 7 };
        let a = make_samples(&spec).unwrap();
        let b = make_samples(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert!(a.points().iter().all(|p| (-1.0..=1.0).contains(&p[0]) && (0.0..=2.0).contains(&p[1])));
        let other = make_samples(&Provenance::LowDiscrepancy {
            lower: vec![-1.0, 0.0],
            upper: vec![1.0, 2.0],
            count: 100,
            seed: 8,
        })
        .unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn empty_box_rejected() {
        let err = make_samples(&Provenance::UniformGrid { lower: vec![1.0], upper: vec![0.0], resolution: 3 });
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        let err = make_samples(&Provenance::UniformGrid { lower: vec![0.0], upper: vec![1.0], resolution: 1 });
        assert!(err.is_err());
    }

    #[test]
    fn rd_is_well_spread() {
        // Every cell of a 10x10 partition receives points from 1000 draws.
        let mut seq = Rd::new(2, 3);
        let mut counts = [0usize; 100];
        for _ in 0..1000 {
            let p = seq.next_unit();
            counts[(p[0] * 10.0) as usize * 10 + (p[1] * 10.0) as usize] += 1;
        }
        assert!(counts.iter().all(|&c| (5..=15).contains(&c)), "{counts:?}");
    }

    #[test]
    fn rd_root_matches_known_constants() {
        assert!((rd_root(1) - 1.618_033_988_749_895).abs() < 1e-12);
        assert!((rd_root(2) - 1.324_717_957_244_746).abs() < 1e-12);
    }

    #[test]
    fn geometric_schedule() {
        let t = TSchedule::geometric(3);
        assert_eq!(t.values(), &[0.5, 0.75, 0.875]);
        assert_eq!(t.tail_start(5), 0);
    }

    #[test]
    fn grid_refinement_is_nested() {
        let s = make_samples(&Provenance::UniformGrid { lower: vec![0.0], upper: vec![1.0], resolution: 3 }).unwrap();
        let r = s.refined().unwrap().unwrap();
        assert_eq!(r.len(), 5);
        for p in s.points() {
            assert!(r.points().contains(p));
        }
    }
}
