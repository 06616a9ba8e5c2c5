//! Regions of `R^n`, strong star-shape checks, and indicator functions.
//!
//! A region `D` is *strongly star-shaped relative to `u0`* when
//! `t * closure(D) + (1 - t) * u0` lies in `D` for every `t` in `[0, 1[`.
//! This is checked by sampling; a pass means no violation was found among
//! the tested `(t, u)` pairs.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ext::ExtReal;
use crate::oracle::{FunctionOracle, Properties};
use crate::sampling::{
    dist, make_samples, segment_point, unit_sphere_points, Point, Provenance, SampleSet, TSchedule,
};

pub const DEFAULT_CLOSURE_TOL: f64 = 1e-9;

/// Relative slack on sphere radii: a sphere has empty interior, so an exact
/// floating-point membership test would accept almost nothing.
const SHELL_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Shape {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default)]
        open: bool,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default)]
        open: bool,
    },
    /// Closed annulus `inner <= |x - center| <= outer`; a sphere when
    /// `inner == outer`.
    Shell { center: Vec<f64>, inner: f64, outer: f64 },
    /// `{x : <normal_i, x> <= offset_i}`, sampled inside `[lower, upper]`.
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default)]
        open: bool,
        #[serde(default)]
        bounded: bool,
    },
    Union { first: Box<Shape>, second: Box<Shape> },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Box { lower, .. } => lower.len(),
            Shape::Ball { center, .. } | Shape::Shell { center, .. } => center.len(),
            Shape::Polytope { lower, .. } => lower.len(),
            Shape::Union { first, .. } => first.dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Shape::Box { lower, upper, .. } => {
                if lower.is_empty() || lower.len() != upper.len() || lower.iter().zip(upper).any(|(l, u)| !(l <= u)) {
                    return Err(Error::invalid(format!("invalid box {lower:?} x {upper:?}")));
                }
            }
            Shape::Ball { center, radius, .. } => {
                if center.is_empty() || !(*radius > 0.0) {
                    return Err(Error::invalid("ball needs a nonempty center and positive radius"));
                }
            }
            Shape::Shell { center, inner, outer } => {
                if center.is_empty() || !(*inner >= 0.0 && inner <= outer && *outer > 0.0) {
                    return Err(Error::invalid("shell needs 0 <= inner <= outer, outer > 0"));
                }
            }
            Shape::Polytope { normals, offsets, lower, upper, .. } => {
                if normals.len() != offsets.len() || normals.is_empty() {
                    return Err(Error::invalid("polytope needs one offset per normal"));
                }
                if normals.iter().any(|n| n.len() != lower.len() || n.iter().all(|v| *v == 0.0)) {
                    return Err(Error::invalid("polytope normals must be nonzero and match the dimension"));
                }
                if lower.len() != upper.len() || lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
                    return Err(Error::invalid("polytope sampling window must be a nonempty box"));
                }
            }
            Shape::Union { first, second } => {
                first.validate()?;
                second.validate()?;
                check_dim(first.dim(), second.dim())?;
            }
        }
        Ok(())
    }

    pub fn convex(&self) -> bool {
        match self {
            Shape::Box { .. } | Shape::Ball { .. } | Shape::Polytope { .. } => true,
            Shape::Shell { inner, .. } => *inner == 0.0,
            Shape::Union { .. } => false,
        }
    }

    pub fn bounded(&self) -> bool {
        match self {
            Shape::Box { .. } | Shape::Ball { .. } | Shape::Shell { .. } => true,
            Shape::Polytope { bounded, .. } => *bounded,
            Shape::Union { first, second } => first.bounded() && second.bounded(),
        }
    }

    pub fn is_open(&self) -> bool {
        match self {
            Shape::Box { open, .. } | Shape::Ball { open, .. } | Shape::Polytope { open, .. } => *open,
            Shape::Shell { .. } => false,
            Shape::Union { first, second } => first.is_open() && second.is_open(),
        }
    }

    /// The same shape with every open flag cleared.
    pub fn closure(&self) -> Shape {
        let mut s = self.clone();
        match &mut s {
            Shape::Box { open, .. } | Shape::Ball { open, .. } | Shape::Polytope { open, .. } => *open = false,
            Shape::Shell { .. } => {}
            Shape::Union { first, second } => {
                **first = first.closure();
                **second = second.closure();
            }
        }
        s
    }

    /// Membership in the set itself (strict inequalities where open).
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Shape::Box { open: true, .. } | Shape::Ball { open: true, .. } | Shape::Polytope { open: true, .. } => {
                self.contains_interior(x)
            }
            Shape::Union { first, second } => first.contains(x) || second.contains(x),
            _ => self.contains_closed(x, 0.0),
        }
    }

    /// Membership in the interior.
    pub fn contains_interior(&self, x: &[f64]) -> bool {
        match self {
            Shape::Box { lower, upper, .. } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| l < v && v < u)
            }
            Shape::Ball { center, radius, .. } => dist(x, center) < *radius,
            Shape::Shell { center, inner, outer } => {
                let d = dist(x, center);
                *inner < d && d < *outer
            }
            Shape::Polytope { normals, offsets, .. } => {
                normals.iter().zip(offsets).all(|(n, b)| dot(n, x) < *b)
            }
            Shape::Union { first, second } => first.contains_interior(x) || second.contains_interior(x),
        }
    }

    /// Membership in the closure, with absolute slack `tol`.
    pub fn contains_closed(&self, x: &[f64], tol: f64) -> bool {
        match self {
            Shape::Box { lower, upper, .. } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| l - tol <= *v && *v <= u + tol)
            }
            Shape::Ball { center, radius, .. } => dist(x, center) <= radius + tol,
            Shape::Shell { center, inner, outer } => {
                let d = dist(x, center);
                let slack = tol + SHELL_SLACK * outer;
                inner - slack <= d && d <= outer + slack
            }
            Shape::Polytope { normals, offsets, .. } => normals
                .iter()
                .zip(offsets)
                .all(|(n, b)| dot(n, x) <= b + tol * norm_of(n)),
            Shape::Union { first, second } => first.contains_closed(x, tol) || second.contains_closed(x, tol),
        }
    }

    /// An axis-aligned box containing the set (the sampling window for
    /// polytopes).
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Shape::Box { lower, upper, .. } | Shape::Polytope { lower, upper, .. } => (lower.clone(), upper.clone()),
            Shape::Ball { center, radius: r, .. } | Shape::Shell { center, outer: r, .. } => (
                center.iter().map(|c| c - r).collect(),
                center.iter().map(|c| c + r).collect(),
            ),
            Shape::Union { first, second } => {
                let (l1, u1) = first.bounding_box();
                let (l2, u2) = second.bounding_box();
                (
                    l1.iter().zip(&l2).map(|(a, b)| a.min(*b)).collect(),
                    u1.iter().zip(&u2).map(|(a, b)| a.max(*b)).collect(),
                )
            }
        }
    }

    /// Candidate points on the topological boundary of this shape.
    fn boundary_candidates(&self, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Point>> {
        let n = self.dim();
        match self {
            Shape::Box { lower, upper, .. } => {
                let widths: Vec<f64> = lower.iter().zip(upper).map(|(l, u)| u - l).collect();
                let face_area: Vec<f64> = (0..n)
                    .map(|i| (0..n).filter(|&j| j != i).map(|j| widths[j]).product::<f64>())
                    .collect();
                let total: f64 = face_area.iter().sum::<f64>() * 2.0;
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let mut p: Point = lower.iter().zip(upper).map(|(l, u)| rng.random_range(*l..=*u)).collect();
                    let (axis, high) = if total > 0.0 {
                        let mut pick = rng.random::<f64>() * total;
                        let mut chosen = (n - 1, true);
                        'outer: for (i, a) in face_area.iter().enumerate() {
                            for high in [false, true] {
                                if pick < *a {
                                    chosen = (i, high);
                                    break 'outer;
                                }
                                pick -= a;
                            }
                        }
                        chosen
                    } else {
                        (rng.random_range(0..n), rng.random::<bool>())
                    };
                    p[axis] = if high { upper[axis] } else { lower[axis] };
                    out.push(p);
                }
                Ok(out)
            }
            Shape::Ball { center, radius, .. } => Ok(unit_sphere_points(n, count, rng)
                .into_iter()
                .map(|v| center.iter().zip(&v).map(|(c, d)| c + radius * d).collect())
                .collect()),
            Shape::Shell { center, inner, outer } => {
                let w_out = outer.powi(n as i32 - 1);
                let w_in = if *inner > 0.0 { inner.powi(n as i32 - 1) } else { 0.0 };
                let dirs = unit_sphere_points(n, count, rng);
                Ok(dirs
                    .into_iter()
                    .map(|v| {
                        let r = if rng.random::<f64>() * (w_in + w_out) < w_in { *inner } else { *outer };
                        center.iter().zip(&v).map(|(c, d)| c + r * d).collect()
                    })
                    .collect())
            }
            Shape::Polytope { normals, offsets, lower, upper, .. } => {
                let mut out = Vec::with_capacity(count);
                let mut attempts = 0usize;
                while out.len() < count {
                    attempts += 1;
                    if attempts > 1000 * count.max(1) {
                        return Err(Error::Sampling("polytope boundary sampling starved".into()));
                    }
                    let i = rng.random_range(0..normals.len());
                    let x: Point = lower.iter().zip(upper).map(|(l, u)| rng.random_range(*l..=*u)).collect();
                    let nrm = &normals[i];
                    let excess = (dot(nrm, &x) - offsets[i]) / dot(nrm, nrm);
                    let p: Point = x.iter().zip(nrm).map(|(xi, ni)| xi - excess * ni).collect();
                    let in_window = p.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| l <= v && v <= u);
                    if in_window && self.contains_closed(&p, 1e-12) {
                        out.push(p);
                    }
                }
                Ok(out)
            }
            Shape::Union { first, second } => {
                let mut out = Vec::with_capacity(count);
                let mut attempts = 0usize;
                while out.len() < count {
                    attempts += 1;
                    if attempts > 1000 {
                        return Err(Error::Sampling("union boundary sampling starved".into()));
                    }
                    let need = count - out.len();
                    let mut batch = first.boundary_candidates(need, rng)?;
                    batch.extend(second.boundary_candidates(need, rng)?);
                    // Interleave so both parts contribute before truncation.
                    let half = batch.len() / 2;
                    let (a, b) = batch.split_at(half);
                    for (p, q) in a.iter().zip(b) {
                        for cand in [p, q] {
                            if out.len() < count && !self.contains_interior(cand) {
                                out.push(cand.clone());
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_of(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A subset `D` of `R^n` with a distinguished point `u0` (its center).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionSpec", into = "RegionSpec")]
pub struct Region {
    shape: Shape,
    center: Point,
    closure_tol: f64,
}

/// JSON form of a [`Region`]: the shape fields plus optional `u0` and
/// `closure_tol`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionSpec {
    #[serde(flatten)]
    pub shape: Shape,
    /// The distinguished point `u0`.
    #[serde(default, rename = "u0", skip_serializing_if = "Option::is_none")]
    pub center: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure_tol: Option<f64>,
}

impl TryFrom<RegionSpec> for Region {
    type Error = Error;

    fn try_from(spec: RegionSpec) -> Result<Region> {
        let mut region = match spec.center {
            Some(c) => Region::new(spec.shape, c)?,
            None => Region::centered(spec.shape)?,
        };
        if let Some(tol) = spec.closure_tol {
            region.closure_tol = tol;
        }
        Ok(region)
    }
}

impl From<Region> for RegionSpec {
    fn from(r: Region) -> RegionSpec {
        RegionSpec { shape: r.shape, center: Some(r.center), closure_tol: Some(r.closure_tol) }
    }
}

impl Region {
    /// `center` must belong to the region.
    pub fn new(shape: Shape, center: Point) -> Result<Self> {
        shape.validate()?;
        check_dim(shape.dim(), center.len())?;
        if !shape.contains(&center) {
            return Err(Error::invalid(format!("center {center:?} is not in the region")));
        }
        Ok(Region { shape, center, closure_tol: DEFAULT_CLOSURE_TOL })
    }

    /// Uses the natural center of a box or ball.
    pub fn centered(shape: Shape) -> Result<Self> {
        let center = match &shape {
            Shape::Box { lower, upper, .. } => lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect(),
            Shape::Ball { center, .. } => center.clone(),
            _ => return Err(Error::invalid("this region kind needs an explicit center")),
        };
        Region::new(shape, center)
    }

    pub fn closed_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Region::centered(Shape::Box { lower, upper, open: false })
    }

    pub fn open_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Region::centered(Shape::Box { lower, upper, open: true })
    }

    pub fn ball(center: Vec<f64>, radius: f64, open: bool) -> Result<Self> {
        Region::centered(Shape::Ball { center, radius, open })
    }

    pub fn with_center(&self, center: Point) -> Result<Self> {
        let mut r = Region::new(self.shape.clone(), center)?;
        r.closure_tol = self.closure_tol;
        Ok(r)
    }

    pub fn with_closure_tol(mut self, tol: f64) -> Self {
        self.closure_tol = tol;
        self
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn closure_tol(&self) -> f64 {
        self.closure_tol
    }

    pub fn declared_convex(&self) -> bool {
        self.shape.convex()
    }

    pub fn bounded(&self) -> bool {
        self.shape.bounded()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.shape.contains(x)
    }

    pub fn contains_interior(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.shape.contains_interior(x)
    }

    pub fn contains_closure(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.shape.contains_closed(x, self.closure_tol)
    }

    /// The closed region with the same center.
    pub fn closure(&self) -> Region {
        Region { shape: self.shape.closure(), center: self.center.clone(), closure_tol: self.closure_tol }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        self.shape.bounding_box()
    }

    /// Points on the topological boundary, constructed analytically per shape.
    pub fn sample_boundary(&self, count: usize, seed: u64) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::invalid("boundary sample count must be >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = self.shape.boundary_candidates(count, &mut rng)?;
        SampleSet::user(pts)
    }

    /// `count` points of the region itself: the center first, then
    /// low-discrepancy points of the bounding box that fall inside. Sets
    /// with empty interior fall back to boundary points that pass `contains`.
    pub fn sample_interiorish(&self, count: usize, seed: u64) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::invalid("interior sample count must be >= 1"));
        }
        let mut pts = vec![self.center.clone()];
        let (lower, upper) = self.bounding_box();
        let mut batch = 4 * count;
        let mut round = 0u64;
        while pts.len() < count && round < 6 {
            let cand = make_samples(&Provenance::LowDiscrepancy {
                lower: lower.clone(),
                upper: upper.clone(),
                count: batch,
                seed: seed.wrapping_add(round),
            })?;
            for p in cand.into_points() {
                if pts.len() < count && self.contains(&p) {
                    pts.push(p);
                }
            }
            batch *= 4;
            round += 1;
        }
        if pts.len() < count {
            let extra = self.sample_boundary(4 * count, seed)?;
            for p in extra.into_points() {
                if pts.len() < count && self.contains(&p) {
                    pts.push(p);
                }
            }
        }
        if pts.len() < count {
            return Err(Error::Sampling(format!(
                "found only {} of {count} points inside the region",
                pts.len()
            )));
        }
        SampleSet::user(pts)
    }

    /// Sampled test that `x` is interior: `x` and a small sphere around it
    /// all lie in the interior.
    pub fn interior_by_sampling(&self, x: &[f64], radius: f64, count: usize, seed: u64) -> bool {
        if !self.contains_interior(x) {
            return false;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        unit_sphere_points(self.dim(), count, &mut rng)
            .iter()
            .all(|v| {
                let p: Point = x.iter().zip(v).map(|(a, d)| a + radius * d).collect();
                self.contains_interior(&p)
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarShapeReport {
    pub t_schedule: TSchedule,
    pub tested_points: usize,
    pub tested_pairs: usize,
    pub violation_count: usize,
    /// First violations found, in sample order, capped.
    pub violations: Vec<(f64, Point)>,
    pub pass: bool,
}

const MAX_STORED_VIOLATIONS: usize = 256;

/// Tests `t * u + (1 - t) * u0` in `D` for every scheduled `t` and every
/// closure sample `u`.
pub fn check_strong_star_shape(
    region: &Region,
    t_schedule: &TSchedule,
    closure_samples: &SampleSet,
) -> Result<StarShapeReport> {
    if closure_samples.is_empty() {
        return Err(Error::EmptySamples("star-shape closure samples".into()));
    }
    check_dim(region.dim(), closure_samples.dim())?;
    if let Some(bad) = closure_samples.points().iter().find(|p| !region.contains_closure(p)) {
        return Err(Error::invalid(format!("closure sample {bad:?} is not in the closure of the region")));
    }
    let u0 = region.center();
    let per_point: Vec<Vec<(f64, Point)>> = closure_samples
        .points()
        .par_iter()
        .map(|u| {
            t_schedule
                .values()
                .iter()
                .filter(|&&t| t < 1.0)
                .filter(|&&t| !region.contains(&segment_point(t, u, u0)))
                .map(|&t| (t, u.clone()))
                .collect()
        })
        .collect();
    let violation_count = per_point.iter().map(Vec::len).sum();
    let violations: Vec<_> = per_point.into_iter().flatten().take(MAX_STORED_VIOLATIONS).collect();
    let scheduled = t_schedule.values().iter().filter(|&&t| t < 1.0).count();
    Ok(StarShapeReport {
        t_schedule: t_schedule.clone(),
        tested_points: closure_samples.len(),
        tested_pairs: scheduled * closure_samples.len(),
        violation_count,
        violations,
        pass: violation_count == 0,
    })
}

/// Boundary and interior samples together: the usual closure sample set.
pub fn closure_samples(region: &Region, boundary: usize, interior: usize, seed: u64) -> Result<SampleSet> {
    region
        .sample_boundary(boundary, seed)?
        .merged(&region.sample_interiorish(interior, seed)?)
}

/// `D1 ∪ D2` for convex `D1`, `D2` whose interiors overlap around `u0`.
pub fn union_of_convex(d1: &Region, d2: &Region, u0: Point) -> Result<Region> {
    check_dim(d1.dim(), d2.dim())?;
    check_dim(d1.dim(), u0.len())?;
    if !d1.declared_convex() || !d2.declared_convex() {
        return Err(Error::refused("union_of_convex needs two convex regions"));
    }
    let radius = 1e-6 * crate::sampling::norm(&u0).max(1.0);
    if !(d1.interior_by_sampling(&u0, radius, 64, 0) && d2.interior_by_sampling(&u0, radius, 64, 0)) {
        return Err(Error::refused(format!("{u0:?} is not interior to the intersection of the two regions")));
    }
    let shape = Shape::Union { first: Box::new(d1.shape.clone()), second: Box::new(d2.shape.clone()) };
    let mut region = Region::new(shape, u0)?;
    region.closure_tol = d1.closure_tol.max(d2.closure_tol);
    Ok(region)
}

/// `chi_D`: `0` on `D`, `+inf` elsewhere.
pub fn indicator(region: &Region) -> FunctionOracle {
    let r = region.clone();
    let props = Properties { convex: region.declared_convex(), continuous: false, ..Default::default() }
        .with_lower(0.0)
        .with_upper(0.0);
    FunctionOracle::new("indicator", region.dim(), props, move |x| {
        if r.contains(x) {
            ExtReal::ZERO
        } else {
            ExtReal::PosInf
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::PosInf;

    fn union_of_boxes(open: bool) -> Region {
        let d1 = Region::centered(Shape::Box { lower: vec![-1.0, -1.0], upper: vec![1.0, 0.5], open }).unwrap();
        let d2 = Region::centered(Shape::Box { lower: vec![-0.5, -1.0], upper: vec![0.5, 1.0], open }).unwrap();
        union_of_convex(&d1, &d2, vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn closed_ball_is_strongly_star_shaped() {
        let ball = Region::ball(vec![0.0, 0.0], 1.0, false).unwrap();
        let samples = closure_samples(&ball, 200, 200, 1).unwrap();
        let report = check_strong_star_shape(&ball, &TSchedule::geometric(20), &samples).unwrap();
        assert!(report.pass, "{:?}", report.violations.first());
        assert_eq!(report.tested_pairs, 400 * 20);
    }

    #[test]
    fn sphere_is_not_star_shaped() {
        let sphere = Region::new(
            Shape::Shell { center: vec![0.0, 0.0], inner: 1.0, outer: 1.0 },
            vec![1.0, 0.0],
        )
        .unwrap();
        let samples = sphere.sample_boundary(50, 3).unwrap();
        let report = check_strong_star_shape(&sphere, &TSchedule::new(vec![0.5]).unwrap(), &samples).unwrap();
        assert!(!report.pass);
        // Only u = u0 itself can stay on the sphere.
        assert!(report.violation_count >= 49);
    }

    #[test]
    fn union_of_overlapping_boxes_is_star_shaped_and_nonconvex() {
        for open in [false, true] {
            let d = union_of_boxes(open);
            assert!(!d.declared_convex());
            let samples = closure_samples(&d, 500, 500, 11).unwrap();
            assert_eq!(samples.len(), 1000);
            let report = check_strong_star_shape(&d, &TSchedule::geometric(20), &samples).unwrap();
            assert!(report.pass, "open={open}: {:?}", report.violations.first());
        }
        // Nonconvex: the segment between two members leaves the set.
        let d = union_of_boxes(false);
        assert!(d.contains(&[0.5, 1.0]) && d.contains(&[1.0, 0.5]));
        assert!(!d.contains(&[0.75, 0.75]));
    }

    #[test]
    fn union_relative_to_a_point_outside_the_overlap_fails() {
        // (0.9, 0) is in D1 only; D2's top edge is not visible from it.
        let d = union_of_boxes(false).with_center(vec![0.9, 0.0]).unwrap();
        let samples = d.sample_boundary(400, 2).unwrap();
        let report = check_strong_star_shape(&d, &TSchedule::geometric(20), &samples).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn union_boundary_points_are_on_the_boundary() {
        let d = union_of_boxes(true);
        let b = d.sample_boundary(300, 5).unwrap();
        for p in b.points() {
            assert!(d.contains_closure(p));
            assert!(!d.contains(p), "{p:?} should not be in the open union");
        }
    }

    #[test]
    fn idempotent_union() {
        let ball = Region::ball(vec![0.0, 0.0], 1.0, false).unwrap();
        let u = union_of_convex(&ball, &ball, vec![0.0, 0.0]).unwrap();
        let grid = make_samples(&Provenance::UniformGrid {
            lower: vec![-1.5, -1.5],
            upper: vec![1.5, 1.5],
            resolution: 31,
        })
        .unwrap();
        for p in grid.points() {
            assert_eq!(u.contains(p), ball.contains(p));
        }
    }

    #[test]
    fn disjoint_boxes_are_rejected() {
        let d1 = Region::closed_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let d2 = Region::closed_box(vec![2.0, 2.0], vec![3.0, 3.0]).unwrap();
        let err = union_of_convex(&d1, &d2, vec![0.5, 0.5]).unwrap_err();
        assert!(err.is_refusal());
        // Touching at an edge is not enough either.
        let d3 = Region::closed_box(vec![1.0, 0.0], vec![2.0, 1.0]).unwrap();
        assert!(union_of_convex(&d1, &d3, vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn indicator_values() {
        let unit = Region::closed_box(vec![0.0], vec![1.0]).unwrap();
        let chi = indicator(&unit);
        assert_eq!(chi.eval(&[0.5]).unwrap(), ExtReal::ZERO);
        assert_eq!(chi.eval(&[2.0]).unwrap(), PosInf);
        let open = Region::open_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let chi = indicator(&open);
        for p in open.sample_boundary(100, 9).unwrap().points() {
            assert_eq!(chi.eval(p).unwrap(), PosInf);
        }
        for p in open.sample_interiorish(100, 9).unwrap().points() {
            assert_eq!(chi.eval(p).unwrap(), ExtReal::ZERO);
        }
    }

    #[test]
    fn region_json_round_trip() {
        let d = union_of_boxes(true);
        let s = serde_json::to_string(&d).unwrap();
        let back: Region = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let parsed: Region =
            serde_json::from_str(r#"{"name":"ball","center":[0,0],"radius":2.0}"#).unwrap();
        assert!(parsed.contains(&[1.9, 0.0]) && !parsed.contains(&[2.1, 0.0]));
    }

    #[test]
    fn polytope_boundary_sampling() {
        // Triangle x >= 0, y >= 0, x + y <= 1.
        let tri = Region::new(
            Shape::Polytope {
                normals: vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 1.0]],
                offsets: vec![0.0, 0.0, 1.0],
                lower: vec![0.0, 0.0],
                upper: vec![1.0, 1.0],
                open: false,
                bounded: true,
            },
            vec![0.25, 0.25],
        )
        .unwrap();
        let b = tri.sample_boundary(60, 1).unwrap();
        for p in b.points() {
            assert!(tri.contains_closure(p));
            assert!(!tri.contains_interior(p));
        }
        let report = check_strong_star_shape(&tri, &TSchedule::geometric(20), &b).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn sample_must_lie_in_closure() {
        let ball = Region::ball(vec![0.0], 1.0, false).unwrap();
        let far = SampleSet::user(vec![vec![3.0]]).unwrap();
        assert!(check_strong_star_shape(&ball, &TSchedule::geometric(5), &far).is_err());
    }
}
